#include "gradsync/flow.hpp"

#include <numbers>
#include <ostream>
#include <sstream>

namespace gradsync {

void Ensemble::add(std::span<const double> x, std::uint32_t label) {
  if (static_cast<int>(x.size()) != dim) throw PreconditionError("flow", "point dimension mismatch");
  coords.insert(coords.end(), x.begin(), x.end());
  labels.push_back(label);
}

void Ensemble::append(const Ensemble& other) {
  if (other.dim != dim) throw PreconditionError("flow", "ensemble dimension mismatch");
  coords.insert(coords.end(), other.coords.begin(), other.coords.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

Ensemble Ensemble::sphere_sample(int dim, std::size_t n, double radius, double eps) {
  Ensemble e(dim, eps);
  if (n == 0) return e;
  if (dim == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (i % 2 == 0 ? radius : -radius);
      e.add(std::span<const double>(&x, 1));
    }
  } else if (dim == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      const std::array<double, 2> x{radius * std::cos(a), radius * std::sin(a)};
      e.add(x);
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = n == 1 ? 0.0 : 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(i);
      const std::array<double, 3> x{radius * rho * std::cos(a), radius * rho * std::sin(a), radius * z};
      e.add(x);
    }
  } else {
    throw PreconditionError("flow", "sphere_sample supports d <= 3");
  }
  return e;
}

Ensemble Ensemble::square_grid(std::size_t per_side, double half_width, double eps) {
  Ensemble e(2, eps);
  if (per_side == 0) return e;
  for (std::size_t i = 0; i < per_side; ++i) {
    for (std::size_t j = 0; j < per_side; ++j) {
      const double step = per_side == 1 ? 0.0 : 2.0 * half_width / static_cast<double>(per_side - 1);
      const std::array<double, 2> x{per_side == 1 ? 0.0 : -half_width + step * static_cast<double>(i),
                                    per_side == 1 ? 0.0 : -half_width + step * static_cast<double>(j)};
      e.add(x);
    }
  }
  return e;
}

std::size_t refine_closed_curve(Ensemble& e, std::size_t n_curve, std::uint32_t keep_below,
                                std::uint32_t& next_label, const CurveRefinement& r) {
  if (e.dim != 2) throw PreconditionError("flow", "curve refinement is defined for d = 2");
  if (n_curve < 3 || n_curve > e.size()) return n_curve;
  const double max_sq = r.max_gap * r.max_gap;
  const double min_sq = r.min_gap * r.min_gap;
  auto dist_sq = [](const double* a, const double* b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
  };

  std::vector<double> coords;
  std::vector<std::uint32_t> labels;
  coords.reserve(e.coords.size() + 64);
  labels.reserve(e.labels.size() + 32);
  const double* c = e.coords.data();
  const double* prev = c + 2 * (n_curve - 1);
  for (std::size_t i = 0; i < n_curve; ++i) {
    const double* x = c + 2 * i;
    const double* next = c + 2 * ((i + 1) % n_curve);
    if (e.labels[i] >= keep_below && dist_sq(prev, x) < min_sq && dist_sq(x, next) < min_sq) continue;
    coords.push_back(x[0]);
    coords.push_back(x[1]);
    labels.push_back(e.labels[i]);
    prev = x;
    const double gap_sq = dist_sq(x, next);
    if (gap_sq > max_sq) {
      const auto pieces = static_cast<std::size_t>(std::ceil(std::sqrt(gap_sq) / r.max_gap));
      for (std::size_t k = 1; k < pieces; ++k) {
        const double w = static_cast<double>(k) / static_cast<double>(pieces);
        coords.push_back(x[0] + w * (next[0] - x[0]));
        coords.push_back(x[1] + w * (next[1] - x[1]));
        labels.push_back(next_label++);
      }
    }
  }
  const std::size_t n_new = labels.size();
  if (n_new > r.max_points) throw PreconditionError("flow", "curve refinement exceeded max_points");
  coords.insert(coords.end(), e.coords.begin() + 2 * n_curve, e.coords.end());
  labels.insert(labels.end(), e.labels.begin() + n_curve, e.labels.end());
  e.coords = std::move(coords);
  e.labels = std::move(labels);
  return n_new;
}

namespace detail {

void throw_divergence(double t, std::size_t index) {
  std::ostringstream os;
  os << "divergence guard exceeded by point " << index << " at t=" << t;
  throw DivergenceError("flow", os.str());
}

}  // namespace detail

Trajectory ode_flow(const RadialPotential& p, std::span<const double> x0, double T, double dt, bool record,
                    double guard) {
  if (!(dt > 0.0) || !(dt <= T)) throw PreconditionError("flow", "ode_flow requires 0 < dt <= T");
  const int dim = static_cast<int>(x0.size());
  Trajectory traj;
  traj.dim = dim;
  std::vector<double> x(x0.begin(), x0.end());
  const std::vector<double> zero(dim, 0.0);
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  const double guard_sq = guard * guard;
  if (record) {
    traj.times.push_back(0.0);
    traj.states.insert(traj.states.end(), x.begin(), x.end());
  }
  for (std::int64_t k = 0; k < steps; ++k) {
    std::size_t bad = 0;
    if (!detail::advance_points(p, dim, x, zero, dt, guard_sq, &bad))
      detail::throw_divergence(static_cast<double>(k + 1) * dt, 0);
    if (record) {
      traj.times.push_back(static_cast<double>(k + 1) * dt);
      traj.states.insert(traj.states.end(), x.begin(), x.end());
    }
  }
  traj.final_point = std::move(x);
  traj.final_time = static_cast<double>(steps) * dt;
  return traj;
}

void sde_step(const RadialPotential& p, Ensemble& ensemble, std::span<const double> dW, double dt,
              double guard) {
  if (!(ensemble.eps >= 0.0)) throw PreconditionError("flow", "sde_step requires eps >= 0");
  std::array<double, 8> shift{};
  const double amp = std::sqrt(ensemble.eps);
  for (int k = 0; k < ensemble.dim; ++k) shift[k] = amp * dW[k];
  std::size_t bad = 0;
  if (!detail::advance_points(p, ensemble.dim, ensemble.coords,
                              std::span<const double>(shift.data(), static_cast<std::size_t>(ensemble.dim)), dt,
                              guard * guard, &bad))
    detail::throw_divergence(ensemble.t + dt, bad);
  ensemble.t += dt;
}

void accelerated_step(const RadialPotential& p, double eps, std::span<double> y, std::span<const double> dW,
                      double dt) {
  const double g = 2.0 * p.du(RadialPotential::norm_sq(y)) / eps * dt;
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = y[k] - g * y[k] + dW[k];
}

PolarState polar_step(const RadialPotential& p, const PolarState& s, double eps, std::span<const double> dW,
                      double dt, const PolarOptions& opts) {
  if (!(eps > 0.0)) throw PreconditionError("flow", "polar_step requires eps > 0");
  if (!(s.r_sq >= opts.floor)) throw RadiusCollapse("flow", "polar state below positivity floor");
  const double r = std::sqrt(s.r_sq);
  const double c = std::cos(s.phi);
  const double sn = std::sin(s.phi);
  PolarState next;
  double dr_sq = -(4.0 / eps) * s.r_sq * p.du(s.r_sq) * dt;
  if (opts.radial_noise) dr_sq += 2.0 * r * (c * dW[0] + sn * dW[1]) + 2.0 * dt;
  next.r_sq = s.r_sq + dr_sq;
  next.phi = s.phi + (-sn * dW[0] + c * dW[1]) / r;
  next.t = s.t + dt;
  if (!(next.r_sq >= opts.floor)) {
    std::ostringstream os;
    os << "r_sq fell to " << next.r_sq << " at t=" << next.t;
    throw RadiusCollapse("flow", os.str());
  }
  return next;
}

double circle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

PullbackCloud pullback_attractor_sample(const RadialPotential& p, double eps, const NoisePath& base,
                                        double T_pullback, const Ensemble& grid, const FlowOptions& opts) {
  if (grid.empty()) throw PreconditionError("flow", "pullback requires a non-empty grid");
  if (!(T_pullback > 0.0)) throw PreconditionError("flow", "pullback requires T_pullback > 0");
  PullbackCloud out;
  out.cloud = grid;
  out.cloud.eps = eps;
  const double excl_sq = opts.origin_exclusion * opts.origin_exclusion;
  const std::size_t before = out.cloud.size();
  out.cloud.retain_if(
      [&](std::size_t i) { return RadialPotential::norm_sq(grid.point(i)) >= excl_sq; });
  out.excluded = before - out.cloud.size();

  const double dt = base.dt();
  out.steps = static_cast<std::int64_t>(std::ceil(T_pullback / dt - 1e-9));
  out.cloud.t = -static_cast<double>(out.steps) * dt;
  if (out.cloud.empty()) return out;
  ShiftView view(base, -out.steps);
  for (std::int64_t k = 0; k < out.steps; ++k) sde_step(p, out.cloud, view, opts.guard);
  out.cloud.t = 0.0;
  return out;
}

void write_ensemble_header(std::ostream& os, int dim) {
  os << "t,point_id";
  for (int k = 1; k <= dim; ++k) os << ",x" << k;
  os << '\n';
}

void write_ensemble_rows(std::ostream& os, const Ensemble& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    os << e.t << ',' << e.labels[i];
    for (double v : e.point(i)) os << ',' << v;
    os << '\n';
  }
}

void write_polar_row(std::ostream& os, const PolarState& s, double z) {
  os << s.t << ',' << s.r_sq << ',' << s.phi << ',' << z << '\n';
}

}  // namespace gradsync
