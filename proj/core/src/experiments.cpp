#include "gradsync/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "gradsync/error.hpp"
#include "gradsync/noise.hpp"

namespace gradsync {

namespace {

constexpr std::size_t kMinFittedReplicas = 30;
constexpr double kMinUncensored = 0.9;

std::string eps_label(double eps) {
  std::ostringstream os;
  os << "eps=" << eps;
  return os.str();
}

double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Uniform variates in (0, 1) from the same counter-based normals the noise
// paths use, so sweeps are reproducible across platforms.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double normal() {
    double z[2];
    standard_normals(seed_, stream_, index_++, std::span<double>(z, 1));
    return z[0];
  }
  double uniform() { return phi(normal()); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::int64_t index_ = 0;
};

void require_replicas(const Campaign& c, ScalingResult& out, bool strict) {
  if (c.replicas >= kMinFittedReplicas) return;
  const std::string msg = "fitted claims need at least 30 replicas, got " + std::to_string(c.replicas);
  if (strict) throw TooFewReplicas("experiments", msg);
  out.flags.push_back(msg);
}

ScalingRow summarize(double eps, const std::vector<StoppingRecord>& recs, double horizon, bool use_mean) {
  ScalingRow row;
  row.eps = eps;
  row.replicas = recs.size();
  row.horizon = horizon;
  std::vector<double> t;
  t.reserve(recs.size());
  for (const auto& r : recs) {
    t.push_back(r.time_or_horizon());
    if (r.censored()) ++row.censored;
  }
  row.mean = mean(t);
  row.median = median(t);
  row.stddev = sample_stddev(t);
  row.statistic = use_mean ? row.mean : row.median;
  const double n = static_cast<double>(t.size());
  // Delta method for log(mean); for the median the same expression is used
  // with the asymptotic 1.2533 inflation of the normal case.
  const double se = n > 0 ? row.stddev / std::sqrt(n) : 0.0;
  row.std_error = row.statistic > 0 ? (use_mean ? 1.0 : 1.2533) * se / row.statistic : 0.0;
  return row;
}

// Applies the 90% rule and fits log(statistic) against x. Leaves `fit` empty
// when a rule fails.
void finish_fit(ScalingResult& out, const std::vector<double>& x, bool strict) {
  for (const auto& row : out.rows) {
    if (row.uncensored_fraction() < kMinUncensored) {
      std::ostringstream os;
      os << "too censored at " << eps_label(row.eps) << ": " << row.censored << " of " << row.replicas;
      if (strict) throw TooCensored("experiments", os.str());
      out.flags.push_back(os.str());
    }
  }
  if (out.flagged()) return;
  std::vector<double> y;
  for (const auto& row : out.rows) y.push_back(std::log(row.statistic));
  try {
    out.fit = fit_loglinear(x, y);
  } catch (const NoFitPossible& e) {
    if (strict) throw;
    out.flags.push_back(e.what());
  }
}

std::vector<double> inverse(const std::vector<double>& eps) {
  std::vector<double> x;
  for (double e : eps) x.push_back(1.0 / e);
  return x;
}

void require_epsilons(const Campaign& c) {
  if (c.epsilons.empty()) throw PreconditionError("experiments", "campaign has no epsilons");
  for (double e : c.epsilons)
    if (!(e > 0.0)) throw PreconditionError("experiments", "epsilons must be positive");
}

}  // namespace

const char* to_string(CampaignKind kind) {
  switch (kind) {
    case CampaignKind::EscapeScaling:
      return "escape";
    case CampaignKind::SetSyncScaling:
      return "set-sync";
    case CampaignKind::PointSyncScaling:
      return "point-sync";
    case CampaignKind::LyapunovCircle:
      return "lyapunov";
    case CampaignKind::GronwallComparison:
      return "gronwall";
    case CampaignKind::ExitProbability:
      return "exit-prob";
    case CampaignKind::CircleSyncRate:
      return "circle-sync";
  }
  return "unknown";
}

double HorizonPolicy::horizon(double eps, double V) const {
  switch (kind) {
    case Kind::Exponential:
      return factor * std::exp(V / eps);
    case Kind::Inverse:
      return factor / eps;
    case Kind::Fixed:
      return value;
  }
  return value;
}

void Campaign::set_epsilons(std::vector<double> eps) {
  std::sort(eps.begin(), eps.end(), std::greater<>());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  epsilons = std::move(eps);
}

Campaign Campaign::defaults(CampaignKind kind) {
  Campaign c;
  c.kind = kind;
  switch (kind) {
    case CampaignKind::EscapeScaling:
      c.set_epsilons({0.30, 0.25, 0.20, 0.15, 0.12});
      c.replicas = 200;
      break;
    case CampaignKind::SetSyncScaling:
      c.set_epsilons({0.30, 0.25, 0.20, 0.15});
      c.replicas = 100;
      break;
    case CampaignKind::PointSyncScaling:
      c.set_epsilons({0.2, 0.1, 0.05, 0.02});
      c.replicas = 100;
      c.horizon = {HorizonPolicy::Kind::Inverse, 100.0, 0.0};
      c.proxy.grid = Ensemble::square_grid(8, 1.5);
      break;
    case CampaignKind::LyapunovCircle:
      c.replicas = 16;
      c.T = 1e4;
      break;
    case CampaignKind::GronwallComparison:
      c.set_epsilons({0.1, 0.05, 0.02, 0.01});
      c.replicas = 100;
      c.T = 1.0;
      break;
    case CampaignKind::ExitProbability:
      c.set_epsilons({0.30, 0.25, 0.20});
      c.replicas = 10000;
      c.T = 1.0;
      break;
    case CampaignKind::CircleSyncRate:
      c.replicas = 100;
      c.T = 50.0;
      break;
  }
  return c;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

EscapeResult escape_scaling(const Campaign& c, bool strict) {
  require_epsilons(c);
  EscapeResult out;
  out.kind = CampaignKind::EscapeScaling;
  require_replicas(c, out, strict);
  const Annulus D(c.r_inner, c.r_outer);
  out.reference = quasi_potential(c.potential, c.r_inner, c.r_start, c.r_outer);
  const std::size_t ne = c.epsilons.size(), nr = c.replicas;
  out.records.resize(ne * nr);
  parallel_for(ne * nr, c.jobs, [&](std::size_t cell) {
    const std::size_t ei = cell / nr, r = cell % nr;
    const double eps = c.epsilons[ei];
    NoisePath noise(c.master_seed, cell_stream(ei, r), c.flow.dt, 2);
    auto M = Ensemble::sphere_sample(2, c.sphere_points, c.r_start, eps);
    out.records[cell] = exit_time(c.potential, std::move(M), D, noise, c.horizon.horizon(eps, out.reference), c.flow,
                                  c.refine_curve ? &c.refinement : nullptr);
  });
  for (std::size_t ei = 0; ei < ne; ++ei) {
    const std::vector<StoppingRecord> cell(out.records.begin() + ei * nr, out.records.begin() + (ei + 1) * nr);
    out.rows.push_back(summarize(c.epsilons[ei], cell, c.horizon.horizon(c.epsilons[ei], out.reference), true));
  }
  for (const auto& r : out.records)
    if (r.side == ExitSide::Outer) ++out.outer_exits;
  if (!out.records.empty() && static_cast<double>(out.outer_exits) >= 0.01 * static_cast<double>(out.records.size()))
    out.flags.push_back("outer-boundary exits reached 1% of replicas");
  finish_fit(out, inverse(c.epsilons), strict);
  return out;
}

SetSyncResult set_sync_scaling(const Campaign& c, bool strict) {
  require_epsilons(c);
  SetSyncResult out;
  out.kind = CampaignKind::SetSyncScaling;
  require_replicas(c, out, strict);
  out.reference = quasi_potential(c.potential, 0.0, 1.0, ExtendedRadius::infinity());
  const std::size_t ne = c.epsilons.size(), nr = c.replicas;
  const Ensemble grid = Ensemble::square_grid(c.grid_per_side, c.grid_half_width);
  std::vector<SetSyncMeasurement> m(ne * nr);
  parallel_for(ne * nr, c.jobs, [&](std::size_t cell) {
    const std::size_t ei = cell / nr, r = cell % nr;
    const double eps = c.epsilons[ei];
    NoisePath noise(c.master_seed, cell_stream(ei, r), c.flow.dt, 2);
    m[cell] = measure_set_sync(c.potential, eps, c.sphere_points, c.delta, c.measure_grid ? &grid : nullptr, noise,
                               c.horizon.horizon(eps, out.reference), c.flow,
                               c.refine_curve ? &c.refinement : nullptr);
  });
  for (auto& x : m) {
    out.records.push_back(x.sphere);
    out.doubled.push_back(x.sphere_doubled);
    if (x.grid) {
      out.grid.push_back(*x.grid);
      if (!x.grid->censored()) {
        ++out.sandwich_checked;
        if (x.sphere_doubled.censored() || *x.sphere_doubled.time > *x.grid->time) ++out.sandwich_violations;
      }
    }
    if (!x.sphere.censored() && (x.sphere_doubled.censored() || *x.sphere_doubled.time > *x.sphere.time))
      ++out.doubling_violations;
  }
  if (out.sandwich_violations) out.flags.push_back("pathwise sandwich violated");
  if (out.doubling_violations) out.flags.push_back("doubling delta increased a sync time");
  for (std::size_t ei = 0; ei < ne; ++ei) {
    const std::vector<StoppingRecord> cell(out.records.begin() + ei * nr, out.records.begin() + (ei + 1) * nr);
    out.rows.push_back(summarize(c.epsilons[ei], cell, c.horizon.horizon(c.epsilons[ei], out.reference), false));
  }
  finish_fit(out, inverse(c.epsilons), strict);
  if (out.fit) {
    std::vector<double> lx, ly;
    for (const auto& row : out.rows) {
      lx.push_back(std::log(1.0 / row.eps));
      ly.push_back(std::log(row.statistic));
    }
    out.loglog = fit_loglinear(lx, ly);
    for (std::size_t i = 1; i < lx.size(); ++i) out.local_slopes.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));
    out.super_linear = out.local_slopes.size() >= 2 && out.loglog->slope > 1.0 &&
                       out.local_slopes.back() > out.local_slopes.front();
  }
  return out;
}

PointSyncResult point_sync_scaling(const Campaign& c, bool strict) {
  require_epsilons(c);
  if (c.start_point.size() != 2) throw PreconditionError("experiments", "point sync is defined for d = 2");
  PointSyncResult out;
  out.kind = CampaignKind::PointSyncScaling;
  require_replicas(c, out, strict);
  out.reference = 1.0;
  const std::size_t ne = c.epsilons.size(), nr = c.replicas;
  std::vector<PointApproachTimes> m(ne * nr);
  parallel_for(ne * nr, c.jobs, [&](std::size_t cell) {
    const std::size_t ei = cell / nr, r = cell % nr;
    const double eps = c.epsilons[ei];
    NoisePath noise(c.master_seed, cell_stream(ei, r), c.flow.dt, 2);
    AttractorProxySpec proxy = c.proxy;
    proxy.pullback_time = std::max(proxy.pullback_time, c.pullback_factor / eps);
    m[cell] = point_to_attractor_times(c.potential, eps, c.start_point, c.delta, proxy, noise,
                                       c.horizon.horizon(eps, 0.0), c.flow);
  });
  for (const auto& x : m) {
    out.records.push_back(x.lower);
    out.upper.push_back(x.upper);
    if (x.lower.time_or_horizon() > x.upper.time_or_horizon()) ++out.order_violations;
  }
  if (out.order_violations) out.flags.push_back("lower approach time exceeded upper");
  for (std::size_t ei = 0; ei < ne; ++ei) {
    const double eps = c.epsilons[ei];
    const std::vector<StoppingRecord> lo(out.records.begin() + ei * nr, out.records.begin() + (ei + 1) * nr);
    const std::vector<StoppingRecord> hi(out.upper.begin() + ei * nr, out.upper.begin() + (ei + 1) * nr);
    out.rows.push_back(summarize(eps, lo, c.horizon.horizon(eps, 0.0), false));
    out.window_lower.push_back(eps * out.rows.back().median);
    out.window_upper.push_back(eps * summarize(eps, hi, c.horizon.horizon(eps, 0.0), false).median);
  }
  const auto [mn, mx] = std::minmax_element(out.window_lower.begin(), out.window_lower.end());
  out.window_ratio = *mn > 0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  std::vector<double> x;
  for (double e : c.epsilons) x.push_back(std::log(1.0 / e));
  finish_fit(out, x, strict);
  return out;
}

ExitProbabilityResult exit_probability(const Campaign& c, double slack) {
  require_epsilons(c);
  if (!(c.T > 0.0)) throw PreconditionError("experiments", "exit probability needs T > 0");
  ExitProbabilityResult out;
  out.slack = slack;
  const Annulus D(c.r_inner, c.r_outer);
  out.V = quasi_potential(c.potential, c.r_inner, c.r_start, c.r_outer);
  const std::size_t ne = c.epsilons.size(), nr = c.replicas;
  std::vector<char> exited(ne * nr, 0);
  parallel_for(ne * nr, c.jobs, [&](std::size_t cell) {
    const std::size_t ei = cell / nr, r = cell % nr;
    const double eps = c.epsilons[ei];
    NoisePath noise(c.master_seed, cell_stream(ei, r), c.flow.dt, 2);
    auto M = Ensemble::sphere_sample(2, c.sphere_points, c.r_start, eps);
    const auto rec =
        exit_time(c.potential, std::move(M), D, noise, c.T, c.flow, c.refine_curve ? &c.refinement : nullptr);
    exited[cell] = rec.censored() ? 0 : 1;
  });
  for (std::size_t ei = 0; ei < ne; ++ei) {
    ExitProbabilityRow row;
    row.eps = c.epsilons[ei];
    row.replicas = nr;
    for (std::size_t r = 0; r < nr; ++r) row.exits += exited[ei * nr + r];
    row.p_hat = nr ? static_cast<double>(row.exits) / static_cast<double>(nr) : 0.0;
    row.wilson = wilson_interval(row.exits, nr);
    row.bound_only = row.exits == 0;
    row.eps_log_p = row.eps * std::log(row.bound_only ? row.wilson.hi : row.p_hat);
    row.within_bound = row.bound_only || row.eps_log_p <= -out.V + slack;
    out.rows.push_back(row);
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& a = out.rows[i - 1];
    const auto& b = out.rows[i];
    if (b.p_hat > a.p_hat + 2.0 * std::max(a.wilson.half_width(), b.wilson.half_width())) out.trend_ok = false;
  }
  return out;
}

LyapunovResult lyapunov_circle(double T, double dt, std::size_t replicas, std::uint64_t seed, double noise_scale,
                               unsigned jobs) {
  if (!(T > 0.0) || !(dt > 0.0)) throw PreconditionError("experiments", "lyapunov_circle needs T, dt > 0");
  if (replicas == 0) throw PreconditionError("experiments", "lyapunov_circle needs replicas >= 1");
  LyapunovResult out;
  out.per_replica.resize(replicas);
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  parallel_for(replicas, jobs, [&](std::size_t r) {
    NoisePath noise(seed, cell_stream(0, r), dt, 2);
    CircleState z;
    double log_v = 0.0;
    double dw[2];
    for (std::int64_t k = 0; k < steps; ++k) {
      noise.increment_at(k, dw);
      dw[0] *= noise_scale;
      dw[1] *= noise_scale;
      log_v += std::log(std::abs(1.0 - std::cos(z.z) * dw[0] - std::sin(z.z) * dw[1]));
      z = circle_step(z, dw, dt);
    }
    out.per_replica[r] = log_v / (static_cast<double>(steps) * dt);
  });
  out.lambda = mean(out.per_replica);
  out.ci_half_width = 1.959963984540054 * sample_stddev(out.per_replica) / std::sqrt(static_cast<double>(replicas));
  return out;
}

CircleSyncResult circle_sync_rate(double separation, double T, double dt, std::size_t replicas, std::uint64_t seed,
                                  unsigned jobs) {
  if (!(T > 0.0) || !(dt > 0.0)) throw PreconditionError("experiments", "circle_sync_rate needs T, dt > 0");
  if (replicas == 0) throw PreconditionError("experiments", "circle_sync_rate needs replicas >= 1");
  constexpr int kWindows = 5;
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  const std::int64_t every = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(0.05 / dt)));
  struct Replica {
    double rate = 0.0;
    double max_distance = 0.0;
    std::array<double, kWindows> sum{};
    std::array<int, kWindows> count{};
  };
  std::vector<Replica> reps(replicas);
  parallel_for(replicas, jobs, [&](std::size_t r) {
    NoisePath noise(seed, cell_stream(0, r), dt, 2);
    CircleState a, b{separation, 0.0};
    std::vector<double> ts, ls;
    Replica& out = reps[r];
    double dw[2];
    for (std::int64_t k = 0; k <= steps; ++k) {
      if (k % every == 0) {
        const double d = circle_distance(a.z, b.z);
        const double t = static_cast<double>(k) * dt;
        out.max_distance = std::max(out.max_distance, d);
        if (d > 0.0) {
          const int w = std::min(kWindows - 1, static_cast<int>(t / T * kWindows));
          out.sum[w] += std::log(d);
          ++out.count[w];
          if (t >= 0.5 * T) {
            ts.push_back(t);
            ls.push_back(std::log(d));
          }
        }
      }
      if (k == steps) break;
      noise.increment_at(k, dw);
      a = circle_step(a, dw, dt);
      b = circle_step(b, dw, dt);
    }
    if (ts.size() >= 3) out.rate = -fit_loglinear(ts, ls).slope;
    else out.rate = std::numeric_limits<double>::quiet_NaN();
  });
  CircleSyncResult out;
  std::size_t fast = 0;
  std::array<double, kWindows> sum{};
  std::array<int, kWindows> count{};
  for (const auto& r : reps) {
    out.rates.push_back(r.rate);
    if (r.rate >= 0.4) ++fast;
    out.max_distance = std::max(out.max_distance, r.max_distance);
    for (int w = 0; w < kWindows; ++w) {
      sum[w] += r.sum[w];
      count[w] += r.count[w];
    }
  }
  std::vector<double> finite;
  for (double x : out.rates)
    if (std::isfinite(x)) finite.push_back(x);
  out.median_rate = median(finite);
  out.fraction_fast = static_cast<double>(fast) / static_cast<double>(replicas);
  for (int w = 0; w < kWindows; ++w)
    if (count[w]) out.window_log_mean.push_back(sum[w] / count[w]);
  for (std::size_t i = 1; i < out.window_log_mean.size(); ++i)
    if (!(out.window_log_mean[i] < out.window_log_mean[i - 1])) out.decreasing = false;
  return out;
}

GronwallResult gronwall_comparison(const Campaign& c) {
  require_epsilons(c);
  if (c.replicas == 0) throw PreconditionError("experiments", "gronwall_comparison needs replicas >= 1");
  const double dt = c.flow.dt_accelerated;
  const auto steps = static_cast<std::int64_t>(std::llround(c.T / dt));
  const std::size_t ne = c.epsilons.size(), nr = c.replicas;
  struct Cell {
    bool collapsed = false;
    double angle = 0.0;
    double radius = 0.0;
    double final_radius = 1.0;
  };
  std::vector<Cell> cells(ne * nr);
  PolarOptions popts;
  popts.floor = c.flow.polar_floor;
  popts.radial_noise = c.radial_noise;
  parallel_for(ne * nr, c.jobs, [&](std::size_t cell) {
    const std::size_t ei = cell / nr, r = cell % nr;
    const double eps = c.epsilons[ei];
    NoisePath noise(c.master_seed, cell_stream(ei, r), dt, 2);
    PolarState s;
    CircleState z;
    Cell& out = cells[cell];
    double dw[2];
    try {
      for (std::int64_t k = 0; k < steps; ++k) {
        noise.increment_at(k, dw);
        s = polar_step(c.potential, s, eps, dw, dt, popts);
        z = circle_step(z, dw, dt);
        out.angle = std::max(out.angle, std::abs(s.phi - z.z));
        out.radius = std::max(out.radius, std::abs(std::sqrt(s.r_sq) - 1.0));
      }
      out.final_radius = std::sqrt(s.r_sq);
    } catch (const RadiusCollapse&) {
      out.collapsed = true;
    }
  });
  GronwallResult res;
  for (std::size_t ei = 0; ei < ne; ++ei) {
    GronwallRow row;
    row.eps = c.epsilons[ei];
    row.replicas = nr;
    std::vector<double> ang, rad;
    std::size_t in_band = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      const Cell& x = cells[ei * nr + r];
      if (x.collapsed) {
        ++row.collapsed;
        continue;
      }
      ang.push_back(x.angle);
      rad.push_back(x.radius);
      if (std::abs(x.final_radius - 1.0) < c.radius_band) ++in_band;
    }
    row.median_angle_dev = median(ang);
    row.median_radius_dev = median(rad);
    row.radius_in_band = ang.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(ang.size());
    res.rows.push_back(row);
  }
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    if (!(res.rows[i].median_angle_dev < res.rows[i - 1].median_angle_dev)) res.strictly_decreasing = false;
  return res;
}

ConsistencyResult polar_cartesian_consistency(const RadialPotential& p, double eps, double T, double dt,
                                              std::size_t replicas, std::uint64_t seed, unsigned jobs) {
  if (!(eps > 0.0) || !(T > 0.0) || !(dt > 0.0))
    throw PreconditionError("experiments", "polar_cartesian_consistency needs eps, T, dt > 0");
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  ConsistencyResult out;
  out.max_deviation.assign(replicas, 0.0);
  std::vector<char> collapsed(replicas, 0);
  parallel_for(replicas, jobs, [&](std::size_t r) {
    NoisePath noise(seed, cell_stream(0, r), dt, 2);
    double y[2] = {1.0, 0.0};
    PolarState s;
    double dw[2];
    double worst = 0.0;
    try {
      for (std::int64_t k = 0; k < steps; ++k) {
        noise.increment_at(k, dw);
        accelerated_step(p, eps, y, dw, dt);
        s = polar_step(p, s, eps, dw, dt);
        const double rad = std::sqrt(s.r_sq);
        worst = std::max(worst, std::hypot(y[0] - rad * std::cos(s.phi), y[1] - rad * std::sin(s.phi)));
      }
    } catch (const RadiusCollapse&) {
      collapsed[r] = 1;
    }
    out.max_deviation[r] = worst;
  });
  for (std::size_t r = 0; r < replicas; ++r) {
    if (collapsed[r]) ++out.collapsed;
    else out.worst = std::max(out.worst, out.max_deviation[r]);
  }
  return out;
}

ActionSweepResult action_inequality_sweep(const RadialPotential& p, std::size_t n_controls, std::uint64_t seed,
                                          double dt) {
  ActionSweepResult out;
  out.tolerance = 10.0 * dt;
  for (std::size_t i = 0; i < n_controls; ++i) {
    UniformStream rng(seed, i);
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const std::array<double, 2> x0{std::cos(angle), std::sin(angle)};
    Control g(2);
    const int pieces = 1 + static_cast<int>(rng.uniform() * 5.0);
    for (int k = 0; k < pieces; ++k) {
      const double duration = 0.2 + 1.8 * rng.uniform();
      g.append_constant(duration, {2.0 * rng.normal(), 2.0 * rng.normal()});
    }
    const auto traj = controlled_flow(p, g, x0, dt);
    ActionCheck check;
    check.action = schilder_action(g);
    check.gap = action_potential_gap(p, traj, 0.0, g.end_time());
    check.slack = check.action - check.gap;
    if (check.slack < -out.tolerance) ++out.failures;
    out.checks.push_back(check);
  }
  return out;
}

ControlStudy control_study(const RadialPotential& p, const std::vector<double>& alphas, double delta,
                           const Ensemble& grid, const BuildOptions& build, const VerifyOptions& verify) {
  ControlStudy out;
  out.V = quasi_potential(p, 0.0, 1.0, ExtendedRadius::infinity());
  VerifyOptions v = verify;
  v.strict = false;
  for (double a : alphas) {
    ControlStudyRow row;
    row.alpha = a;
    const auto built = build_control_g_alpha(p, a, delta, build);
    row.schedule = built.schedule;
    row.report = verify_control(p, built, grid, v);
    if (!(row.report.final_diameter <= delta)) out.diameters_ok = false;
    const double action = row.report.total_action;
    if (!(action >= out.V && action <= out.V + 40.0 * a)) out.within_band = false;
    out.rows.push_back(std::move(row));
  }
  std::vector<const ControlStudyRow*> sorted;
  for (const auto& r : out.rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->alpha < y->alpha; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i]->report.total_action > sorted[i - 1]->report.total_action)) out.decreasing_in_alpha = false;
  return out;
}

}  // namespace gradsync
