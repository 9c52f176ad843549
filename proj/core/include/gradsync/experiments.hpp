#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gradsync/fit.hpp"
#include "gradsync/flow.hpp"
#include "gradsync/ldp.hpp"
#include "gradsync/potential.hpp"
#include "gradsync/stopping.hpp"

namespace gradsync {

enum class CampaignKind {
  EscapeScaling,
  SetSyncScaling,
  PointSyncScaling,
  LyapunovCircle,
  GronwallComparison,
  ExitProbability,
  CircleSyncRate,
};

const char* to_string(CampaignKind kind);

/// How long a replica may run before it is censored.
struct HorizonPolicy {
  enum class Kind { Exponential, Inverse, Fixed };
  Kind kind = Kind::Exponential;
  double factor = 10.0;  // Exponential: factor exp(V/eps); Inverse: factor/eps
  double value = 0.0;    // Fixed

  double horizon(double eps, double V) const;
};

struct Campaign {
  CampaignKind kind = CampaignKind::EscapeScaling;
  std::vector<double> epsilons;  // kept sorted descending
  std::size_t replicas = 200;
  RadialPotential potential = RadialPotential::quartic();
  std::uint64_t master_seed = 1;
  FlowOptions flow;
  unsigned jobs = 0;  // 0: hardware concurrency

  // Geometry.
  double r_inner = 0.3;
  double r_start = 1.0;
  ExtendedRadius r_outer = 2.0;
  std::size_t sphere_points = 64;
  bool refine_curve = true;
  CurveRefinement refinement{0.1, 0.01, 10, 1u << 16};
  double delta = 0.2;
  bool measure_grid = true;
  std::size_t grid_per_side = 15;
  double grid_half_width = 1.5;
  std::vector<double> start_point{2.0, 0.0};
  AttractorProxySpec proxy;
  double pullback_factor = 40.0;  // pullback runs max(proxy.pullback_time, factor/eps)
  HorizonPolicy horizon;

  // Fixed-time and circle campaigns.
  double T = 1.0;
  double separation = 1.5707963267948966;
  double noise_scale = 1.0;
  bool radial_noise = true;
  double radius_band = 0.1;  // P(1 - band < R_T < 1 + band)

  void set_epsilons(std::vector<double> eps);

  /// The reference campaign of each kind (potential Quartic, a = 1/2).
  static Campaign defaults(CampaignKind kind);
};

/// Runs body(i) for i in [0, n) on `jobs` threads. Each index is handled by
/// exactly one thread; callers write results into slot i, so the outcome
/// does not depend on scheduling.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

struct ScalingRow {
  double eps = 0.0;
  std::size_t replicas = 0;
  std::size_t censored = 0;
  double horizon = 0.0;
  double statistic = 0.0;  // mean (escape) or median (sync) of times, censored at the horizon
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;  // of log(statistic), for plot error bars

  double uncensored_fraction() const {
    return replicas ? 1.0 - static_cast<double>(censored) / static_cast<double>(replicas) : 0.0;
  }
};

struct ScalingResult {
  CampaignKind kind = CampaignKind::EscapeScaling;
  std::vector<StoppingRecord> records;  // cell order: eps descending, then replica
  std::vector<ScalingRow> rows;
  std::optional<FitResult> fit;  // log(statistic) against 1/eps (log(1/eps) for point sync)
  double reference = 0.0;        // the exponent the fit is compared to
  std::vector<std::string> flags;

  bool flagged() const { return !flags.empty(); }
};

struct EscapeResult : ScalingResult {
  std::size_t outer_exits = 0;
};

/// Mean exit time of the sphere S_{r_start} from the annulus per eps, fit of
/// log(mean) against 1/eps. With strict set, throws TooCensored (or
/// TooFewReplicas for < 30 replicas) instead of returning a flagged result.
EscapeResult escape_scaling(const Campaign& c, bool strict = true);

struct SetSyncResult : ScalingResult {
  std::vector<StoppingRecord> doubled;  // tau_{1, 2 delta}, same order as records
  std::vector<StoppingRecord> grid;     // tau_3 proxy, empty without a grid
  std::size_t sandwich_checked = 0;
  std::size_t sandwich_violations = 0;
  std::size_t doubling_violations = 0;
  std::optional<FitResult> loglog;   // log(median) against log(1/eps)
  std::vector<double> local_slopes;  // consecutive log-log slopes, eps descending
  bool super_linear = false;         // log-log slope above 1 and steeper at the small-eps end
};

SetSyncResult set_sync_scaling(const Campaign& c, bool strict = true);

struct PointSyncResult : ScalingResult {
  std::vector<StoppingRecord> upper;  // same order as records (which hold the lower times)
  std::vector<double> window_lower;   // eps * median lower time, per eps
  std::vector<double> window_upper;   // eps * median upper time, per eps
  double window_ratio = 0.0;          // max / min of window_lower
  std::size_t order_violations = 0;   // rows with lower > upper
};

/// Median lower point-to-attractor time from start_point per eps; the fit is
/// log(median) against log(1/eps).
PointSyncResult point_sync_scaling(const Campaign& c, bool strict = true);

struct ExitProbabilityRow {
  double eps = 0.0;
  std::size_t replicas = 0;
  std::size_t exits = 0;
  double p_hat = 0.0;
  Interval wilson{0.0, 1.0};
  double eps_log_p = 0.0;   // eps log p_hat, or eps log(upper Wilson bound) when bound_only
  bool bound_only = false;  // no exits observed
  bool within_bound = true; // eps log p_hat <= -V + slack
};

struct ExitProbabilityResult {
  std::vector<ExitProbabilityRow> rows;
  double V = 0.0;
  double slack = 0.4;
  bool trend_ok = true;  // p_hat non-increasing as eps decreases, within 2 half-widths
};

ExitProbabilityResult exit_probability(const Campaign& c, double slack = 0.4);

struct LyapunovResult {
  double lambda = 0.0;
  double ci_half_width = 0.0;
  std::vector<double> per_replica;
};

/// Top Lyapunov exponent of the circle process from the linearization
/// v <- v (1 - cos Z dW1 - sin Z dW2). noise_scale multiplies every increment.
LyapunovResult lyapunov_circle(double T, double dt, std::size_t replicas, std::uint64_t seed,
                               double noise_scale = 1.0, unsigned jobs = 0);

struct CircleSyncResult {
  std::vector<double> rates;            // per replica, fitted on [T/2, T]
  double median_rate = 0.0;
  double fraction_fast = 0.0;           // rates >= 0.4
  std::vector<double> window_log_mean;  // mean log distance over 5 windows of [0, T]
  bool decreasing = true;
  double max_distance = 0.0;            // over all replicas and times
};

CircleSyncResult circle_sync_rate(double separation, double T, double dt, std::size_t replicas, std::uint64_t seed,
                                  unsigned jobs = 0);

struct GronwallRow {
  double eps = 0.0;
  std::size_t replicas = 0;
  std::size_t collapsed = 0;
  double median_angle_dev = 0.0;
  double median_radius_dev = 0.0;
  double radius_in_band = 0.0;  // fraction with |R_T - 1| < band
};

struct GronwallResult {
  std::vector<GronwallRow> rows;
  bool strictly_decreasing = true;
};

/// Polar pair (R, phi) in the accelerated clock against the circle process Z
/// under shared noise, started at R = 1, phi = Z = 0.
GronwallResult gronwall_comparison(const Campaign& c);

struct ConsistencyResult {
  std::vector<double> max_deviation;  // per replica
  double worst = 0.0;
  std::size_t collapsed = 0;
};

/// Accelerated Cartesian Y against (R cos phi, R sin phi) on the same noise.
ConsistencyResult polar_cartesian_consistency(const RadialPotential& p, double eps, double T, double dt,
                                              std::size_t replicas, std::uint64_t seed, unsigned jobs = 0);

struct ActionCheck {
  double action = 0.0;
  double gap = 0.0;  // 2 (U(end) - U(start))
  double slack = 0.0;
};

struct ActionSweepResult {
  std::vector<ActionCheck> checks;
  std::size_t failures = 0;  // action < gap - 10 dt
  double tolerance = 0.0;
};

/// Random piecewise-linear controls started at random points of S_1.
ActionSweepResult action_inequality_sweep(const RadialPotential& p, std::size_t n_controls, std::uint64_t seed,
                                          double dt = 1e-3);

struct ControlStudyRow {
  double alpha = 0.0;
  ControlSchedule schedule;
  VerificationReport report;
};

struct ControlStudy {
  std::vector<ControlStudyRow> rows;  // in the order of `alphas`
  double V = 1.0;
  bool diameters_ok = true;
  bool decreasing_in_alpha = true;
  bool within_band = true;  // action in [V, V + 40 alpha]
};

ControlStudy control_study(const RadialPotential& p, const std::vector<double>& alphas, double delta,
                           const Ensemble& grid, const BuildOptions& build = {}, const VerifyOptions& verify = {});

}  // namespace gradsync
