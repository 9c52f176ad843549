#include "gradsync/stopping.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cstdio>
#include <ostream>

namespace gradsync {

namespace {

std::int64_t steps_for(double horizon, double dt) {
  if (!(horizon >= 0.0)) throw PreconditionError("stopping", "horizon must be nonnegative");
  return static_cast<std::int64_t>(std::ceil(horizon / dt - 1e-9));
}

StoppingRecord base_record(StopKind kind, const Ensemble& e, const NoisePath& noise, double horizon) {
  StoppingRecord r;
  r.kind = kind;
  r.horizon = horizon;
  r.eps = e.eps;
  r.n_points = e.size();
  r.seed = noise.master_seed();
  r.stream_id = noise.stream_id();
  return r;
}

void stop_at(StoppingRecord& r, std::int64_t step, double dt) {
  r.steps = step;
  r.time = static_cast<double>(step) * dt;
}

}  // namespace

Annulus::Annulus(double r_inner, ExtendedRadius r_outer)
    : r_inner_(r_inner),
      r_outer_(r_outer),
      inner_sq_(r_inner * r_inner),
      outer_sq_(r_outer.is_infinite() ? std::numeric_limits<double>::infinity()
                                      : r_outer.value() * r_outer.value()) {
  if (!(r_inner >= 0.0)) throw PreconditionError("stopping", "annulus requires r_inner >= 0");
  if (!(r_inner < r_outer.value())) throw PreconditionError("stopping", "annulus requires r_inner < r_outer");
}

const char* to_string(StopKind kind) {
  switch (kind) {
    case StopKind::ExitAnnulus:
      return "exit_annulus";
    case StopKind::EnterAnnulus:
      return "enter_annulus";
    case StopKind::SphereSync:
      return "sphere_sync";
    case StopKind::GridSync:
      return "grid_sync";
    case StopKind::PointToAttractorLower:
      return "point_to_attractor_lower";
    case StopKind::PointToAttractorUpper:
      return "point_to_attractor_upper";
    case StopKind::TwoPointSync:
      return "two_point_sync";
  }
  return "unknown";
}

void write_stopping_header(std::ostream& os) {
  os << "kind,eps,delta,r_inner,r_outer,n_points,time,censored,horizon,seed,stream_id\n";
}

void write_stopping_row(std::ostream& os, const StoppingRecord& r) {
  char buf[512];
  auto num = [](double v, char* out, std::size_t n) {
    if (std::isnan(v))
      std::snprintf(out, n, "nan");
    else if (std::isinf(v))
      std::snprintf(out, n, "inf");
    else
      std::snprintf(out, n, "%.12g", v);
  };
  char eps[32], delta[32], rin[32], rout[32], t[32], hz[32];
  num(r.eps, eps, sizeof eps);
  num(r.delta, delta, sizeof delta);
  num(r.r_inner, rin, sizeof rin);
  num(r.r_outer, rout, sizeof rout);
  num(r.time_or_horizon(), t, sizeof t);
  num(r.horizon, hz, sizeof hz);
  std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%s,%zu,%s,%d,%s,%" PRIu64 ",%" PRIu64 "\n", to_string(r.kind), eps,
                delta, rin, rout, r.n_points, t, r.censored() ? 1 : 0, hz, r.seed, r.stream_id);
  os << buf;
}

double diameter(const Ensemble& e, std::size_t begin, std::size_t end) {
  double best = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto xi = e.point(i);
    for (std::size_t j = i + 1; j < end; ++j) {
      const auto xj = e.point(j);
      double d2 = 0.0;
      for (int k = 0; k < e.dim; ++k) d2 += (xi[k] - xj[k]) * (xi[k] - xj[k]);
      best = std::max(best, d2);
    }
  }
  return std::sqrt(best);
}

bool diameter_at_most(const Ensemble& e, std::size_t begin, std::size_t end, double delta) {
  if (end - begin <= 1) return true;
  std::array<double, 8> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    const auto x = e.point(i);
    for (int k = 0; k < e.dim; ++k) {
      lo[k] = std::min(lo[k], x[k]);
      hi[k] = std::max(hi[k], x[k]);
    }
  }
  double diag = 0.0;
  for (int k = 0; k < e.dim; ++k) {
    const double w = hi[k] - lo[k];
    if (w > delta) return false;
    diag += w * w;
  }
  const double d2max = delta * delta;
  if (diag <= d2max) return true;
  for (std::size_t i = begin; i < end; ++i) {
    const auto xi = e.point(i);
    for (std::size_t j = i + 1; j < end; ++j) {
      const auto xj = e.point(j);
      double d2 = 0.0;
      for (int k = 0; k < e.dim; ++k) d2 += (xi[k] - xj[k]) * (xi[k] - xj[k]);
      if (d2 > d2max) return false;
    }
  }
  return true;
}

StoppingRecord exit_time(const RadialPotential& p, Ensemble M, const Annulus& D, NoisePath& noise, double horizon,
                         const FlowOptions& opts, const CurveRefinement* refine) {
  for (std::size_t i = 0; i < M.size(); ++i)
    if (!D.contains(M.point(i)))
      throw PreconditionError("stopping", "exit_time requires every point of M to start inside D");
  if (refine && M.dim != 2) throw PreconditionError("stopping", "curve refinement needs d = 2");
  auto rec = base_record(StopKind::ExitAnnulus, M, noise, horizon);
  rec.r_inner = D.r_inner();
  rec.r_outer = D.r_outer().value();
  const double dt = noise.dt();
  const std::int64_t max_steps = steps_for(horizon, dt);
  const double inner_sq = D.r_inner() * D.r_inner();
  const auto keep = static_cast<std::uint32_t>(M.size());
  std::uint32_t next_label = keep;
  std::size_t n = M.size();
  for (std::int64_t k = 0; k < max_steps; ++k) {
    sde_step(p, M, noise, opts.guard);
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = RadialPotential::norm_sq(M.point(i));
      if (!D.contains_sq(r2)) {
        stop_at(rec, k + 1, dt);
        rec.side = r2 <= inner_sq ? ExitSide::Inner : ExitSide::Outer;
        return rec;
      }
    }
    if (refine && (k + 1) % refine->every == 0) n = refine_closed_curve(M, n, keep, next_label, *refine);
  }
  rec.steps = max_steps;
  return rec;
}

StoppingRecord entry_time(const RadialPotential& p, Ensemble M, const Annulus& D, NoisePath& noise, double horizon,
                          const FlowOptions& opts) {
  auto rec = base_record(StopKind::EnterAnnulus, M, noise, horizon);
  rec.r_inner = D.r_inner();
  rec.r_outer = D.r_outer().value();
  const double dt = noise.dt();
  const std::int64_t max_steps = steps_for(horizon, dt);
  auto all_inside = [&] {
    for (std::size_t i = 0; i < M.size(); ++i)
      if (!D.contains(M.point(i))) return false;
    return true;
  };
  if (all_inside()) {
    stop_at(rec, 0, dt);
    return rec;
  }
  for (std::int64_t k = 0; k < max_steps; ++k) {
    sde_step(p, M, noise, opts.guard);
    if (all_inside()) {
      stop_at(rec, k + 1, dt);
      return rec;
    }
  }
  rec.steps = max_steps;
  return rec;
}

std::vector<std::optional<std::int64_t>> run_sync(const RadialPotential& p, Ensemble& e, NoisePath& noise,
                                                  std::span<const SyncCriterion> criteria, std::int64_t max_steps,
                                                  const FlowOptions& opts) {
  std::vector<std::optional<std::int64_t>> hit(criteria.size());
  std::size_t open = criteria.size();
  auto check = [&](std::int64_t step) {
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      if (hit[c]) continue;
      if (diameter_at_most(e, criteria[c].begin, criteria[c].end, criteria[c].delta)) {
        hit[c] = step;
        --open;
      }
    }
  };
  check(0);
  for (std::int64_t k = 0; k < max_steps && open > 0; ++k) {
    sde_step(p, e, noise, opts.guard);
    check(k + 1);
  }
  return hit;
}

StoppingRecord sphere_sync_time(const RadialPotential& p, double eps, std::size_t n, double delta, NoisePath& noise,
                                double horizon, const FlowOptions& opts, const CurveRefinement* refine) {
  if (n < 2) throw PreconditionError("stopping", "sphere_sync_time requires n >= 2");
  if (!(delta > 0.0)) throw PreconditionError("stopping", "sphere_sync_time requires delta > 0");
  return measure_set_sync(p, eps, n, delta, nullptr, noise, horizon, opts, refine).sphere;
}

namespace {

void require_grid_covers(const RadialPotential& p, const Ensemble& grid) {
  const auto c = strong_contraction_radius(p);
  if (const auto* nc = std::get_if<NotContracting>(&c))
    throw PreconditionError("stopping", "grid_sync_time refuses a NotContracting potential: " + nc->reason);
  const double r = std::get<ContractionCertificate>(c).radius;
  for (int k = 0; k < grid.dim; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      lo = std::min(lo, grid.point(i)[k]);
      hi = std::max(hi, grid.point(i)[k]);
    }
    if (lo > -r + 1e-9 || hi < r - 1e-9)
      throw PreconditionError("stopping", "grid does not cover the ball of the strong contraction radius");
  }
}

}  // namespace

StoppingRecord grid_sync_time(const RadialPotential& p, double eps, const Ensemble& grid, double delta,
                              NoisePath& noise, double horizon, const FlowOptions& opts) {
  if (grid.empty()) throw PreconditionError("stopping", "grid_sync_time requires a non-empty grid");
  if (grid.size() > 1) require_grid_covers(p, grid);
  Ensemble e = grid;
  e.eps = eps;
  e.t = 0.0;
  auto rec = base_record(StopKind::GridSync, e, noise, horizon);
  rec.delta = delta;
  const std::int64_t max_steps = steps_for(horizon, noise.dt());
  const SyncCriterion crit{0, e.size(), delta};
  const auto hit = run_sync(p, e, noise, std::span(&crit, 1), max_steps, opts);
  if (hit[0]) stop_at(rec, *hit[0], noise.dt());
  else rec.steps = max_steps;
  return rec;
}

SetSyncMeasurement measure_set_sync(const RadialPotential& p, double eps, std::size_t n_sphere, double delta,
                                    const Ensemble* grid, NoisePath& noise, double horizon,
                                    const FlowOptions& opts, const CurveRefinement* refine) {
  if (n_sphere < 2) throw PreconditionError("stopping", "set sync needs at least 2 sphere points");
  Ensemble e = Ensemble::sphere_sample(2, n_sphere, 1.0, eps);
  if (grid) {
    if (grid->size() > 1) require_grid_covers(p, *grid);
    e.append(*grid);
  }
  const double dt = noise.dt();
  const std::int64_t max_steps = steps_for(horizon, dt);

  // The curve occupies [0, n) and may grow under refinement.
  std::size_t n = n_sphere;
  const auto keep = static_cast<std::uint32_t>(n_sphere);
  std::uint32_t next_label = keep;
  std::array<std::optional<std::int64_t>, 3> hit;
  const int wanted = grid ? 3 : 2;
  auto check = [&](std::int64_t step) {
    if (!hit[0] && diameter_at_most(e, 0, n, delta)) hit[0] = step;
    if (!hit[1] && diameter_at_most(e, 0, n, 2.0 * delta)) hit[1] = step;
    if (grid && !hit[2] && diameter_at_most(e, 0, e.size(), delta)) hit[2] = step;
    for (int c = 0; c < wanted; ++c)
      if (!hit[c]) return false;
    return true;
  };
  if (!check(0)) {
    for (std::int64_t k = 0; k < max_steps; ++k) {
      sde_step(p, e, noise, opts.guard);
      if (refine && (k + 1) % refine->every == 0) n = refine_closed_curve(e, n, keep, next_label, *refine);
      if (check(k + 1)) break;
    }
  }

  auto make = [&](StopKind kind, std::size_t points, double d, const std::optional<std::int64_t>& h) {
    StoppingRecord r;
    r.kind = kind;
    r.horizon = horizon;
    r.eps = eps;
    r.delta = d;
    r.n_points = points;
    r.seed = noise.master_seed();
    r.stream_id = noise.stream_id();
    if (h) stop_at(r, *h, dt);
    else r.steps = max_steps;
    return r;
  };
  SetSyncMeasurement m;
  m.sphere = make(StopKind::SphereSync, n_sphere, delta, hit[0]);
  m.sphere_doubled = make(StopKind::SphereSync, n_sphere, 2.0 * delta, hit[1]);
  if (grid) m.grid = make(StopKind::GridSync, n_sphere + grid->size(), delta, hit[2]);
  return m;
}

StoppingRecord two_point_sync_time(const RadialPotential& p, double eps, std::span<const double> x,
                                   std::span<const double> y, double delta, NoisePath& noise, double horizon,
                                   const FlowOptions& opts) {
  Ensemble e(static_cast<int>(x.size()), eps);
  e.add(x);
  e.add(y);
  auto rec = base_record(StopKind::TwoPointSync, e, noise, horizon);
  rec.delta = delta;
  const std::int64_t max_steps = steps_for(horizon, noise.dt());
  const SyncCriterion crit{0, 2, delta};
  const auto hit = run_sync(p, e, noise, std::span(&crit, 1), max_steps, opts);
  if (hit[0]) stop_at(rec, *hit[0], noise.dt());
  else rec.steps = max_steps;
  return rec;
}

PointApproachTimes point_to_attractor_times(const RadialPotential& p, double eps, std::span<const double> x,
                                            double delta, const AttractorProxySpec& proxy, NoisePath& noise,
                                            double horizon, const FlowOptions& opts) {
  if (x.size() != 2 || proxy.grid.dim != 2)
    throw PreconditionError("stopping", "point_to_attractor_times is defined for d = 2");
  auto pulled = pullback_attractor_sample(p, eps, noise, proxy.pullback_time, proxy.grid, opts);
  if (pulled.cloud.empty()) throw ProxyEmpty("stopping", "attractor proxy is empty after origin exclusion");

  Ensemble e = std::move(pulled.cloud);
  const std::size_t m = e.size();
  e.add(x, 0xFFFFFFFFu);

  PointApproachTimes out;
  out.proxy_size = m;
  out.lower.kind = StopKind::PointToAttractorLower;
  out.upper.kind = StopKind::PointToAttractorUpper;
  for (auto* r : {&out.lower, &out.upper}) {
    r->horizon = horizon;
    r->eps = eps;
    r->delta = delta;
    r->n_points = m;
    r->seed = noise.master_seed();
    r->stream_id = noise.stream_id();
  }

  const double dt = noise.dt();
  const std::int64_t max_steps = steps_for(horizon, dt);
  const double d2 = delta * delta;
  auto check = [&](std::int64_t step) {
    const auto xs = e.point(m);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto a = e.point(i);
      const double dx = xs[0] - a[0], dy = xs[1] - a[1];
      const double r2 = dx * dx + dy * dy;
      lo = std::min(lo, r2);
      hi = std::max(hi, r2);
    }
    if (!out.lower.time && lo <= d2) stop_at(out.lower, step, dt);
    if (!out.upper.time && hi <= d2) stop_at(out.upper, step, dt);
    return out.upper.time.has_value();
  };
  noise.seek(0);
  e.t = 0.0;
  if (!check(0)) {
    for (std::int64_t k = 0; k < max_steps; ++k) {
      sde_step(p, e, noise, opts.guard);
      if (check(k + 1)) break;
    }
  }
  if (!out.lower.time) out.lower.steps = max_steps;
  if (!out.upper.time) out.upper.steps = max_steps;
  return out;
}

double default_horizon(const RadialPotential& p, double eps, double factor) {
  return factor * std::exp(quasi_potential(p, 0.0, 1.0, ExtendedRadius::infinity()) / eps);
}

}  // namespace gradsync
