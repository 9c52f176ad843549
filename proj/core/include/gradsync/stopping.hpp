#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gradsync/flow.hpp"
#include "gradsync/noise.hpp"
#include "gradsync/potential.hpp"

namespace gradsync {

/// D_{r,R} = { x : r < |x| < R }.
class Annulus {
 public:
  Annulus(double r_inner, ExtendedRadius r_outer);

  double r_inner() const { return r_inner_; }
  ExtendedRadius r_outer() const { return r_outer_; }

  bool contains_sq(double r_sq) const { return r_sq > inner_sq_ && r_sq < outer_sq_; }
  bool contains(std::span<const double> x) const { return contains_sq(RadialPotential::norm_sq(x)); }

 private:
  double r_inner_;
  ExtendedRadius r_outer_;
  double inner_sq_;
  double outer_sq_;
};

enum class StopKind {
  ExitAnnulus,
  EnterAnnulus,
  SphereSync,
  GridSync,
  PointToAttractorLower,
  PointToAttractorUpper,
  TwoPointSync,
};

const char* to_string(StopKind kind);

enum class ExitSide { None, Inner, Outer };

struct StoppingRecord {
  StopKind kind = StopKind::ExitAnnulus;
  std::optional<double> time;  // empty: censored at `horizon`
  double horizon = 0.0;
  double eps = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double r_inner = std::numeric_limits<double>::quiet_NaN();
  double r_outer = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_points = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::int64_t steps = 0;  // step index at which the decision was made
  ExitSide side = ExitSide::None;

  bool censored() const { return !time.has_value(); }
  double time_or_horizon() const { return time.value_or(horizon); }
};

/// kind,eps,delta,r_inner,r_outer,n_points,time,censored,horizon,seed,stream_id
void write_stopping_header(std::ostream& os);
void write_stopping_row(std::ostream& os, const StoppingRecord& r);

/// Exact test of max_{i,j in [begin,end)} |x_i - x_j| <= delta, with a
/// bounding-box shortcut before the O(n^2) pairwise pass.
bool diameter_at_most(const Ensemble& e, std::size_t begin, std::size_t end, double delta);
double diameter(const Ensemble& e, std::size_t begin, std::size_t end);

/// tau(M, D): first step time at which any point of M is outside D.
/// Requires all points of M inside D at t = 0. With `refine`, M is a closed
/// curve in d = 2 (cyclic order) kept resolved by refine_closed_curve.
StoppingRecord exit_time(const RadialPotential& p, Ensemble M, const Annulus& D, NoisePath& noise,
                         double horizon, const FlowOptions& opts = {}, const CurveRefinement* refine = nullptr);

/// sigma(M, D): first step time at which every point of M is inside D.
StoppingRecord entry_time(const RadialPotential& p, Ensemble M, const Annulus& D, NoisePath& noise,
                          double horizon, const FlowOptions& opts = {});

/// One sync condition: the points [begin, end) have diameter <= delta.
struct SyncCriterion {
  std::size_t begin;
  std::size_t end;
  double delta;
};

/// Advances `e` under `noise` until every criterion has been met (checked at
/// every step, starting at t = 0) or max_steps is reached. Returns the first
/// step index meeting each criterion.
std::vector<std::optional<std::int64_t>> run_sync(const RadialPotential& p, Ensemble& e, NoisePath& noise,
                                                  std::span<const SyncCriterion> criteria, std::int64_t max_steps,
                                                  const FlowOptions& opts = {});

/// tau_{1,delta}: sampled diameter of the image of n points of S_1.
StoppingRecord sphere_sync_time(const RadialPotential& p, double eps, std::size_t n, double delta,
                                NoisePath& noise, double horizon, const FlowOptions& opts = {},
                                const CurveRefinement* refine = nullptr);

/// Finite-grid proxy for tau_{3,delta}; an under-estimate by grid resolution.
/// Refuses NotContracting potentials and grids that do not reach the
/// contraction radius in every coordinate direction.
StoppingRecord grid_sync_time(const RadialPotential& p, double eps, const Ensemble& grid, double delta,
                              NoisePath& noise, double horizon, const FlowOptions& opts = {});

/// tau_{1,delta}, tau_{1,2 delta} on n sphere points and the tau_3 proxy on
/// sphere + grid, all measured on one noise path in one pass. With `refine`
/// the sphere sample is the initial polygon of a refined image curve.
struct SetSyncMeasurement {
  StoppingRecord sphere;          // delta
  StoppingRecord sphere_doubled;  // 2 delta
  std::optional<StoppingRecord> grid;
};

SetSyncMeasurement measure_set_sync(const RadialPotential& p, double eps, std::size_t n_sphere, double delta,
                                    const Ensemble* grid, NoisePath& noise, double horizon,
                                    const FlowOptions& opts = {}, const CurveRefinement* refine = nullptr);

StoppingRecord two_point_sync_time(const RadialPotential& p, double eps, std::span<const double> x,
                                   std::span<const double> y, double delta, NoisePath& noise, double horizon,
                                   const FlowOptions& opts = {});

/// Attractor proxy for point-approach times: a grid pulled back from
/// -pullback_time to 0 and then carried forward with the trajectory.
struct AttractorProxySpec {
  Ensemble grid = Ensemble::square_grid(8, 1.5);
  double pullback_time = 200.0;
};

struct PointApproachTimes {
  StoppingRecord lower;  // nearest proxy point within delta
  StoppingRecord upper;  // farthest proxy point within delta
  std::size_t proxy_size = 0;
};

/// d = 2 only. Throws ProxyEmpty if nothing is left after origin exclusion.
PointApproachTimes point_to_attractor_times(const RadialPotential& p, double eps, std::span<const double> x,
                                            double delta, const AttractorProxySpec& proxy, NoisePath& noise,
                                            double horizon, const FlowOptions& opts = {});

/// Default censoring horizon 10 exp(V(0,1,inf)/eps).
double default_horizon(const RadialPotential& p, double eps, double factor = 10.0);

}  // namespace gradsync
