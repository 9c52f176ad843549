#include "gradsync/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "gradsync/error.hpp"
#include "gradsync/stopping.hpp"

namespace gradsync {

// ---------------------------------------------------------------------------
// Control

void Control::append_constant(double duration, std::vector<double> h, std::string label) {
  if (!(duration >= 0.0)) throw PreconditionError("ldp", "control piece duration must be >= 0");
  if (static_cast<int>(h.size()) != dim_) throw PreconditionError("ldp", "control velocity dimension mismatch");
  std::vector<double> start(dim_, 0.0);
  if (!pieces_.empty()) g(end_time(), start);
  ControlPiece piece;
  piece.t_start = end_time();
  piece.t_end = piece.t_start + duration;
  piece.velocity = std::move(h);
  piece.label = std::move(label);
  pieces_.push_back(std::move(piece));
  g_start_.push_back(std::move(start));
  g_samples_.emplace_back();
}

void Control::append_sampled(std::vector<double> offsets, std::vector<double> values, std::string label) {
  if (offsets.size() < 2 || offsets.front() != 0.0)
    throw PreconditionError("ldp", "sampled control needs >= 2 samples starting at offset 0");
  if (values.size() != offsets.size() * static_cast<std::size_t>(dim_))
    throw PreconditionError("ldp", "sampled control value count mismatch");
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (!(offsets[i] > offsets[i - 1])) throw PreconditionError("ldp", "sample offsets must increase");
  std::vector<double> start(dim_, 0.0);
  if (!pieces_.empty()) g(end_time(), start);
  ControlPiece piece;
  piece.t_start = end_time();
  for (double& o : offsets) o += piece.t_start;
  piece.t_end = offsets.back();
  piece.sample_times = std::move(offsets);
  piece.sample_values = std::move(values);
  piece.label = std::move(label);

  // Cumulative trapezoid integral of h at every sample, relative to the piece start.
  std::vector<double> cum(piece.sample_times.size() * dim_, 0.0);
  for (std::size_t i = 1; i < piece.sample_times.size(); ++i) {
    const double w = piece.sample_times[i] - piece.sample_times[i - 1];
    for (int k = 0; k < dim_; ++k)
      cum[i * dim_ + k] = cum[(i - 1) * dim_ + k] +
                          0.5 * w * (piece.sample_values[(i - 1) * dim_ + k] + piece.sample_values[i * dim_ + k]);
  }
  pieces_.push_back(std::move(piece));
  g_start_.push_back(std::move(start));
  g_samples_.push_back(std::move(cum));
}

std::size_t Control::piece_index(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const ControlPiece& p) { return v < p.t_end; });
  if (it == pieces_.end()) return pieces_.size() - 1;
  return static_cast<std::size_t>(it - pieces_.begin());
}

void Control::velocity(double t, std::span<double> out) const {
  std::fill(out.begin(), out.begin() + dim_, 0.0);
  if (pieces_.empty() || t < 0.0 || t > end_time()) return;
  const auto& piece = pieces_[piece_index(t)];
  if (!piece.sampled()) {
    std::copy(piece.velocity.begin(), piece.velocity.end(), out.begin());
    return;
  }
  const auto& ts = piece.sample_times;
  std::size_t j = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  j = std::clamp<std::size_t>(j, 1, ts.size() - 1) - 1;
  const double f = (t - ts[j]) / (ts[j + 1] - ts[j]);
  for (int k = 0; k < dim_; ++k)
    out[k] = piece.sample_values[j * dim_ + k] +
             f * (piece.sample_values[(j + 1) * dim_ + k] - piece.sample_values[j * dim_ + k]);
}

void Control::g_within(std::size_t idx, double t, std::span<double> out) const {
  const auto& piece = pieces_[idx];
  t = std::clamp(t, piece.t_start, piece.t_end);
  const auto& start = g_start_[idx];
  if (!piece.sampled()) {
    for (int k = 0; k < dim_; ++k) out[k] = start[k] + piece.velocity[k] * (t - piece.t_start);
    return;
  }
  const auto& ts = piece.sample_times;
  std::size_t j = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  j = std::clamp<std::size_t>(j, 1, ts.size() - 1) - 1;
  const double w = ts[j + 1] - ts[j];
  const double tau = t - ts[j];
  const auto& cum = g_samples_[idx];
  for (int k = 0; k < dim_; ++k) {
    const double h0 = piece.sample_values[j * dim_ + k];
    const double h1 = piece.sample_values[(j + 1) * dim_ + k];
    const double ht = h0 + (h1 - h0) * tau / w;
    out[k] = start[k] + cum[j * dim_ + k] + 0.5 * tau * (h0 + ht);
  }
}

void Control::g(double t, std::span<double> out) const {
  if (pieces_.empty() || t <= 0.0) {
    std::fill(out.begin(), out.begin() + dim_, 0.0);
    return;
  }
  g_within(piece_index(t), t, out);
}

Control Control::scaled(double c) const {
  Control out(dim_);
  for (const auto& piece : pieces_) {
    if (piece.sampled()) {
      std::vector<double> offsets(piece.sample_times);
      for (double& o : offsets) o -= piece.t_start;
      offsets.front() = 0.0;
      std::vector<double> values(piece.sample_values);
      for (double& v : values) v *= c;
      out.append_sampled(std::move(offsets), std::move(values), piece.label);
    } else {
      std::vector<double> h(piece.velocity);
      for (double& v : h) v *= c;
      out.append_constant(piece.t_end - piece.t_start, std::move(h), piece.label);
    }
  }
  return out;
}

double schilder_action(const Control& g) { return schilder_action(g, 0.0, g.end_time()); }

double schilder_action(const Control& g, double s, double t) {
  const int dim = g.dim();
  double total = 0.0;
  for (const auto& piece : g.pieces()) {
    const double a = std::max(s, piece.t_start);
    const double b = std::min(t, piece.t_end);
    if (!(b > a)) continue;
    if (!piece.sampled()) {
      double v = 0.0;
      for (double x : piece.velocity) v += x * x;
      total += 0.5 * v * (b - a);
      continue;
    }
    // h is linear between nodes, so |h|^2 is integrated exactly per node
    // interval; restrictions then add up to the whole.
    const auto& ts = piece.sample_times;
    std::vector<double> h0(dim), h1(dim);
    double prev_t = a;
    g.velocity(a, h0);
    auto segment = [&](double t1) {
      double aa = 0.0, ab = 0.0, bb = 0.0;
      for (int k = 0; k < dim; ++k) aa += h0[k] * h0[k], ab += h0[k] * h1[k], bb += h1[k] * h1[k];
      total += 0.5 * (t1 - prev_t) * (aa + ab + bb) / 3.0;
      prev_t = t1;
      h0 = h1;
    };
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i] <= a) continue;
      if (ts[i] >= b) break;
      for (int k = 0; k < dim; ++k) h1[k] = piece.sample_values[i * dim + k];
      segment(ts[i]);
    }
    if (b == piece.t_end) {
      const std::size_t last = ts.size() - 1;
      for (int k = 0; k < dim; ++k) h1[k] = piece.sample_values[last * dim + k];
    } else {
      g.velocity(b, h1);
    }
    segment(b);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Controlled flow

void controlled_advance(const RadialPotential& p, const Control& g, Ensemble& e, double t_from, double t_to,
                        double dt) {
  if (!(t_to >= t_from)) throw PreconditionError("ldp", "controlled_advance requires t_to >= t_from");
  const int dim = e.dim;
  const auto n = static_cast<std::int64_t>(std::ceil((t_to - t_from) / dt - 1e-9));
  std::array<double, 8> g0{}, g1{}, shift{};
  std::span<double> s0(g0.data(), dim), s1(g1.data(), dim);
  g.g(t_from, s0);
  const double guard_sq = FlowOptions{}.guard * FlowOptions{}.guard;
  double t = t_from;
  for (std::int64_t k = 0; k < n; ++k) {
    const double next = k + 1 == n ? t_to : t_from + static_cast<double>(k + 1) * dt;
    g.g(next, s1);
    for (int i = 0; i < dim; ++i) shift[i] = g1[i] - g0[i];
    std::size_t bad = 0;
    if (!detail::advance_points(p, dim, e.coords, std::span<const double>(shift.data(), dim), next - t, guard_sq,
                                &bad))
      detail::throw_divergence(next, bad);
    t = next;
    g0 = g1;
  }
  e.t = t_to;
}

ControlledTrajectory controlled_flow(const RadialPotential& p, const Control& g, std::span<const double> x0,
                                     double dt, double t_end) {
  if (t_end < 0.0) t_end = g.end_time();
  ControlledTrajectory traj;
  traj.dim = static_cast<int>(x0.size());
  Ensemble e(traj.dim, 0.0);
  e.add(x0);
  traj.times.push_back(0.0);
  traj.states.insert(traj.states.end(), x0.begin(), x0.end());
  const auto n = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double next = k + 1 == n ? t_end : static_cast<double>(k + 1) * dt;
    controlled_advance(p, g, e, t, next, dt);
    t = next;
    traj.times.push_back(t);
    traj.states.insert(traj.states.end(), e.coords.begin(), e.coords.end());
  }
  return traj;
}

std::size_t ControlledTrajectory::index_at(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return times.size() - 1;
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (i > 0 && std::abs(times[i - 1] - t) < std::abs(times[i] - t)) --i;
  return i;
}

double action_potential_gap(const RadialPotential& p, const ControlledTrajectory& phi, double s, double t) {
  if (!(s < t)) throw PreconditionError("ldp", "action_potential_gap requires s < t");
  if (phi.times.empty() || s < phi.times.front() || t > phi.times.back() + 1e-12)
    throw PreconditionError("ldp", "action_potential_gap: [s, t] outside the trajectory span");
  return 2.0 * (p.U(phi.state(phi.index_at(t))) - p.U(phi.state(phi.index_at(s))));
}

// ---------------------------------------------------------------------------
// g^alpha

double ControlSchedule::total_action() const {
  double s = 0.0;
  for (double a : per_phase_action) s += a;
  return s;
}

namespace {

// Root of f on [lo, hi] for increasing f with f(lo) <= 0 <= f(hi).
template <class F>
double bisect(F f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

Ensemble ring(std::size_t n, double radius) { return Ensemble::sphere_sample(2, n, radius); }

}  // namespace

GAlphaResult build_control_g_alpha(const RadialPotential& p, double alpha, double delta, const BuildOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("ldp", "alpha must lie in (0, 1)");
  if (!(delta > 0.0)) throw PreconditionError("ldp", "delta must be positive");
  if (p.du(4.0) < 2.0 * alpha) {
    std::ostringstream os;
    os << "u'(4) = " << p.du(4.0) << " < 2 alpha = " << 2.0 * alpha;
    throw AlphaTooLarge("ldp", os.str());
  }
  if (std::holds_alternative<NotContracting>(strong_contraction_radius(p)))
    throw PreconditionError("ldp", "g^alpha requires a strongly contracting potential");

  GAlphaResult out;
  auto& s = out.schedule;
  s.alpha = alpha;
  s.delta = delta;

  // c1 = max{1 - a, sup{0 < x < 1 : u'(x^2) <= -a}}; u' is increasing in s.
  double sup_x = 0.0;
  if (p.du(0.0) <= -alpha) sup_x = std::sqrt(bisect([&](double v) { return p.du(v) + alpha; }, 0.0, 1.0));
  s.c1 = std::max(1.0 - alpha, sup_x);
  // c2 = inf{x > 1 : u'(x^2) >= 2a} <= 2.
  s.c2 = std::sqrt(bisect([&](double v) { return p.du(v) - 2.0 * alpha; }, 1.0, 4.0));

  const double h2 = 3.0 * alpha;
  const double h4 = (-2.0 * p.du(0.0) + 1.0) * alpha;
  const double h7 = 4.0 * alpha * s.c2;

  // Step 1: every point is inside B_{1+a} by T1.
  s.T[0] = 0.0;
  s.T[1] = contraction_time(p, 1.0 + alpha);
  // Step 2.
  s.T[2] = s.T[1] + 2.0;

  // Step 3: reversed flow phi' = grad U~(phi) = 2 phi u'(phi^2) from -c1 until phi = -a.
  std::vector<double> offsets{0.0};
  std::vector<double> values;
  auto h_rev = [&](double x) { return 4.0 * x * p.du(x * x); };  // 2 grad U~(x)
  double phi = -s.c1;
  values.push_back(h_rev(phi));
  values.push_back(0.0);
  const double dtr = opts.reversed_dt;
  std::int64_t k = 0;
  for (;; ++k) {
    if (k >= opts.max_reversed_steps)
      throw ReversedFlowStall("ldp", "reversed flow did not reach -alpha within the step budget");
    const double next = phi + 0.5 * h_rev(phi) * dtr;
    if (next >= -alpha) {
      const double f = (-alpha - phi) / (next - phi);
      offsets.push_back((static_cast<double>(k) + f) * dtr);
      values.push_back(h_rev(-alpha));
      values.push_back(0.0);
      break;
    }
    phi = next;
    offsets.push_back(static_cast<double>(k + 1) * dtr);
    values.push_back(h_rev(phi));
    values.push_back(0.0);
  }
  s.reversed_flow_end = -alpha;
  s.reversed_flow_gap = 2.0 * (p.u(alpha * alpha) - p.u(s.c1 * s.c1));
  s.T[3] = s.T[2] + offsets.back();
  // Step 4.
  s.T[4] = s.T[3] + 2.0;

  Control& g = out.control;
  g.append_constant(s.T[1], {0.0, 0.0}, "0");
  g.append_constant(2.0, {h2, 0.0}, "3a");
  g.append_sampled(offsets, values, "2 grad U~(phi)");
  g.append_constant(2.0, {h4, 0.0}, "(-2u'(0)+1)a");

  // Step 5: eta from the ring S_{1+a}; y1 = (-1-a, 0) is sample n/2.
  const std::size_t n = opts.ring_samples + opts.ring_samples % 2;
  Ensemble sphere = ring(n, 1.0 + alpha);
  const Ensemble sphere0 = sphere;
  const std::size_t y1 = n / 2;
  controlled_advance(p, g, sphere, s.T[1], s.T[2], opts.dt);
  if (!(sphere.point(y1)[0] >= -s.c1))
    throw PhasePredicateFailed(2, "y1 did not reach -c1 by T2: x1 = " + describe(sphere.point(y1)[0]));
  controlled_advance(p, g, sphere, s.T[2], s.T[3], opts.dt);
  if (!(sphere.point(y1)[0] >= -alpha - 10.0 * opts.dt))
    throw PhasePredicateFailed(3, "y1 did not reach -alpha by T3: x1 = " + describe(sphere.point(y1)[0]));
  controlled_advance(p, g, sphere, s.T[3], s.T[4], opts.dt);
  if (!(sphere.point(y1)[0] > 0.0))
    throw PhasePredicateFailed(4, "y1 not in the right half plane at T4: x1 = " + describe(sphere.point(y1)[0]));

  double margin = 2.0 * (1.0 + alpha);
  for (std::size_t i = 0; i < n; ++i) {
    if (sphere.point(i)[0] > 0.0) continue;
    margin = std::min(margin, sphere0.point(i)[0] + 1.0 + alpha);
  }
  const double resolution = (1.0 + alpha) * (1.0 - std::cos(2.0 * std::numbers::pi / static_cast<double>(n)));
  if (!(margin > resolution))
    throw PhasePredicateFailed(5, "no positive neighbourhood of y1 at the ring resolution");
  s.eta_raw = margin;
  s.eta = 0.5 * margin;
  s.beta = alpha * s.eta;
  s.T[5] = s.T[4] + 8.0 / (alpha * s.eta * s.eta);
  g.append_constant(s.T[5] - s.T[4], {s.beta, 0.0}, "beta");

  // Step 6: settle the sampled ball B_{1+a} into c1 <= |x| <= 2.
  Ensemble ball(2, 0.0);
  const double origin[2] = {0.0, 0.0};
  ball.add(origin);
  for (std::size_t r = 1; r <= opts.ball_rings; ++r) {
    const double radius = (1.0 + alpha) * static_cast<double>(r) / static_cast<double>(opts.ball_rings);
    const std::size_t m = r == opts.ball_rings ? n : std::max<std::size_t>(8, n * r / opts.ball_rings / 4);
    ball.append(ring(m, radius));
  }
  controlled_advance(p, g, ball, s.T[1], s.T[5], opts.dt);
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (!(ball.point(i)[0] > 0.0))
      throw PhasePredicateFailed(5, "sampled ball point " + std::to_string(i) + " not in the right half plane at T5");

  auto settled = [&] {
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const double r = std::sqrt(RadialPotential::norm_sq(ball.point(i)));
      if (r < s.c1 || r > 2.0) return false;
    }
    return true;
  };
  Control zero(2);
  zero.append_constant(opts.max_settle_time, {0.0, 0.0});
  double settle = 0.0;
  while (!settled()) {
    if (settle >= opts.max_settle_time)
      throw PhasePredicateFailed(6, "sampled ball did not settle into c1 <= |x| <= 2");
    controlled_advance(p, zero, ball, settle, settle + opts.dt, opts.dt);
    settle += opts.dt;
  }
  s.T[6] = s.T[5] + std::max(settle, opts.dt);
  g.append_constant(s.T[6] - s.T[5], {0.0, 0.0}, "0");

  // Step 7: Gronwall contraction onto z = (c2, 0).
  s.T[7] = s.T[6] + 4.0 / alpha * (std::log(8.0) - std::log(delta));
  g.append_constant(s.T[7] - s.T[6], {h7, 0.0}, "4 a c2");

  s.h_description = {"0", "3a=" + describe(h2), "2 grad U~(phi(s-T2))", "(-2u'(0)+1)a=" + describe(h4),
                     "beta=" + describe(s.beta), "0", "4 a c2=" + describe(h7)};
  for (int j = 1; j <= 7; ++j) s.per_phase_action[j - 1] = schilder_action(g, s.T[j - 1], s.T[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Verification

bool VerificationReport::passed() const { return first_failure() == nullptr; }

const PhasePredicate* VerificationReport::first_failure() const {
  for (const auto& p : predicates)
    if (!p.passed) return &p;
  return nullptr;
}

VerificationReport verify_control(const RadialPotential& p, const GAlphaResult& built, const Ensemble& grid,
                                  const VerifyOptions& opts) {
  if (grid.dim != 2) throw PreconditionError("ldp", "control verification runs in d = 2");
  const auto& s = built.schedule;
  const auto& g = built.control;
  VerificationReport rep;
  rep.dt = opts.dt;
  const double tol = 10.0 * opts.dt;

  Ensemble e = grid;
  e.t = 0.0;
  std::vector<double> U_start(e.size());
  auto snapshot_U = [&] {
    for (std::size_t i = 0; i < e.size(); ++i) U_start[i] = p.U(e.point(i));
  };
  auto max_radius = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) m = std::max(m, std::sqrt(RadialPotential::norm_sq(e.point(i))));
    return m;
  };
  auto min_radius = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.size(); ++i) m = std::min(m, std::sqrt(RadialPotential::norm_sq(e.point(i))));
    return m;
  };
  auto min_x1 = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.size(); ++i) m = std::min(m, e.point(i)[0]);
    return m;
  };

  rep.min_gap_slack = std::numeric_limits<double>::infinity();
  auto close_phase = [&](int phase) {
    const double action = schilder_action(g, s.T[phase - 1], s.T[phase]);
    rep.phase_action[phase - 1] = action;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double gap = 2.0 * (p.U(e.point(i)) - U_start[i]);
      rep.min_gap_slack = std::min(rep.min_gap_slack, action - gap);
    }
  };

  for (int phase = 1; phase <= 6; ++phase) {
    snapshot_U();
    controlled_advance(p, g, e, s.T[phase - 1], s.T[phase], opts.dt);
    close_phase(phase);
    if (phase == 1) {
      const double r = max_radius();
      rep.predicates.push_back({1, "max |x| <= 1 + alpha at T1", r <= 1.0 + s.alpha + tol, r, 1.0 + s.alpha});
    } else if (phase == 5) {
      const double m = min_x1();
      rep.predicates.push_back({5, "min x1 > 0 at T5", m > 0.0, m, 0.0});
    } else if (phase == 6) {
      const double lo = min_radius(), hi = max_radius();
      rep.predicates.push_back({6, "min |x| >= c1 at T6", lo >= s.c1 - tol, lo, s.c1});
      rep.predicates.push_back({6, "max |x| <= 2 at T6", hi <= 2.0 + tol, hi, 2.0});
    }
  }

  // Phase 7 in ten slices, recording the diameter at each slice end.
  snapshot_U();
  rep.phase7_times.push_back(s.T[6]);
  rep.phase7_diameters.push_back(diameter(e, 0, e.size()));
  for (int slice = 1; slice <= 10; ++slice) {
    const double a = s.T[6] + (s.T[7] - s.T[6]) * (slice - 1) / 10.0;
    const double b = slice == 10 ? s.T[7] : s.T[6] + (s.T[7] - s.T[6]) * slice / 10.0;
    controlled_advance(p, g, e, a, b, opts.dt);
    rep.phase7_times.push_back(b);
    rep.phase7_diameters.push_back(diameter(e, 0, e.size()));
  }
  close_phase(7);
  bool monotone = true;
  for (std::size_t i = 1; i < rep.phase7_diameters.size(); ++i)
    monotone = monotone && rep.phase7_diameters[i] <= rep.phase7_diameters[i - 1] + 1e-12;
  rep.final_diameter = rep.phase7_diameters.back();
  rep.predicates.push_back({7, "diameter non-increasing during phase 7", monotone, rep.final_diameter, 0.0});
  rep.predicates.push_back({7, "final diameter <= delta", rep.final_diameter <= s.delta, rep.final_diameter, s.delta});

  // z = (c2, 0) is fixed under phase-7 drift + control.
  Ensemble z(2, 0.0);
  const double zc[2] = {s.c2, 0.0};
  z.add(zc);
  const double t0 = 0.5 * (s.T[6] + s.T[7]);
  controlled_advance(p, g, z, t0, t0 + opts.dt, opts.dt);
  rep.fixed_point_residual = std::hypot(z.point(0)[0] - s.c2, z.point(0)[1]);
  rep.predicates.push_back(
      {7, "z = (c2, 0) stationary in phase 7", rep.fixed_point_residual <= opts.dt, rep.fixed_point_residual, opts.dt});

  rep.predicates.push_back({0, "action >= 2 (U(end) - U(start)) - 10 dt per phase", rep.min_gap_slack >= -tol,
                            rep.min_gap_slack, -tol});

  rep.total_action = schilder_action(g);
  rep.schedule_action = s.total_action();

  if (opts.strict) {
    if (const auto* f = rep.first_failure()) {
      std::ostringstream os;
      os << f->name << " (value " << f->value << ", bound " << f->bound << ")";
      throw PhasePredicateFailed(f->step, os.str());
    }
  }
  return rep;
}

void write_schedule_csv(std::ostream& os, const ControlSchedule& s) {
  os << "phase,t_start,t_end,h_description,action\n";
  char buf[256];
  for (int j = 1; j <= 7; ++j) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,\"%s\",%.12g\n", j, s.T[j - 1], s.T[j],
                  s.h_description[j - 1].c_str(), s.per_phase_action[j - 1]);
    os << buf;
  }
}

void write_verification_report(std::ostream& os, const ControlSchedule& s, const VerificationReport& r) {
  os << "alpha = " << s.alpha << "\n"
     << "delta = " << s.delta << "\n"
     << "c1 = " << s.c1 << "\n"
     << "c2 = " << s.c2 << "\n"
     << "eta = " << s.eta << " (sampled margin " << s.eta_raw << ")\n"
     << "beta = " << s.beta << "\n"
     << "T7 = " << s.T[7] << "\n"
     << "total_action = " << r.total_action << "\n"
     << "final_diameter = " << r.final_diameter << "\n"
     << "fixed_point_residual = " << r.fixed_point_residual << "\n"
     << "min_action_gap_slack = " << r.min_gap_slack << "\n";
  for (const auto& pr : r.predicates)
    os << "step " << pr.step << ": " << pr.name << " -> " << (pr.passed ? "pass" : "FAIL") << " (value " << pr.value
       << ", bound " << pr.bound << ")\n";
}

}  // namespace gradsync
