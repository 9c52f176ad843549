#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gradsync/error.hpp"
#include "gradsync/noise.hpp"
#include "gradsync/potential.hpp"

namespace gradsync {

struct FlowOptions {
  double dt = 1e-3;              // natural clock
  double dt_accelerated = 1e-4;  // accelerated clock t -> t/eps
  double guard = 1e6;            // divergence guard on |x|
  double polar_floor = 1e-8;     // r_sq below this raises RadiusCollapse
  double origin_exclusion = 1e-3;
};

/// Points advanced together under one shared noise path: a sampled
/// stochastic flow x -> X_t(x). Coordinates are stored flat, `dim` per point.
struct Ensemble {
  int dim = 2;
  std::vector<double> coords;
  std::vector<std::uint32_t> labels;
  double t = 0.0;
  double eps = 0.0;

  Ensemble() = default;
  Ensemble(int d, double eps_) : dim(d), eps(eps_) {}

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<double> point(std::size_t i) { return {coords.data() + i * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  void add(std::span<const double> x, std::uint32_t label);
  void add(std::span<const double> x) { add(x, static_cast<std::uint32_t>(size())); }
  /// Appends every point of `other` (same dim), keeping its labels.
  void append(const Ensemble& other);
  /// Keeps only the points whose index satisfies pred(index).
  template <class Pred>
  void retain_if(Pred pred);

  /// n points on the sphere of the given radius: equally spaced angles in
  /// d = 2, a Fibonacci lattice in d = 3, the two points +-radius in d = 1.
  static Ensemble sphere_sample(int dim, std::size_t n, double radius = 1.0, double eps = 0.0);
  /// per_side^2 points on the square [-half_width, half_width]^2.
  static Ensemble square_grid(std::size_t per_side, double half_width, double eps = 0.0);
};

template <class Pred>
void Ensemble::retain_if(Pred pred) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!pred(i)) continue;
    if (w != i) {
      for (int k = 0; k < dim; ++k) coords[w * dim + k] = coords[i * dim + k];
      labels[w] = labels[i];
    }
    ++w;
  }
  coords.resize(w * dim);
  labels.resize(w);
}

/// Keeps a closed curve in d = 2 (the points [0, n) of an ensemble, in
/// cyclic order) resolved while the flow stretches it: a chord longer than
/// max_gap gets evenly spaced points inserted on it, and an inserted point
/// whose two neighbours are both closer than min_gap is dropped again.
/// Points with label < keep_below are never dropped.
struct CurveRefinement {
  double max_gap = 0.05;
  double min_gap = 0.005;
  std::int64_t every = 10;  // steps between refinement passes
  std::size_t max_points = 1u << 16;
};

/// Returns the new number of curve points; points after the curve keep their
/// order. Throws PreconditionError if refinement would exceed max_points.
std::size_t refine_closed_curve(Ensemble& e, std::size_t n_curve, std::uint32_t keep_below,
                                std::uint32_t& next_label, const CurveRefinement& r);

struct Trajectory {
  int dim = 0;
  std::vector<double> times;   // recorded sample times (empty unless recorded)
  std::vector<double> states;  // dim per recorded time
  std::vector<double> final_point;
  double final_time = 0.0;
};

/// Explicit Euler for dx = -grad U(x) dt from x0 over [0, T].
Trajectory ode_flow(const RadialPotential& p, std::span<const double> x0, double T, double dt,
                    bool record = false, double guard = FlowOptions{}.guard);

namespace detail {

// x <- x - grad U(x) dt + shift, for every point. Returns false if a point
// left the guard ball (the offending index is written to *bad).
inline bool advance_points(const RadialPotential& p, int dim, std::span<double> coords,
                           std::span<const double> shift, double dt, double guard_sq,
                           std::size_t* bad) {
  const std::size_t n = coords.size() / dim;
  if (dim == 2) {
    const double s0 = shift[0], s1 = shift[1];
    for (std::size_t i = 0; i < n; ++i) {
      double& x = coords[2 * i];
      double& y = coords[2 * i + 1];
      const double r2 = x * x + y * y;
      const double g = 2.0 * p.du(r2) * dt;
      x = x - g * x + s0;
      y = y - g * y + s1;
      if (!(x * x + y * y <= guard_sq)) {
        *bad = i;
        return false;
      }
    }
    return true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double* x = coords.data() + i * dim;
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
    const double g = 2.0 * p.du(r2) * dt;
    double nr2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      x[k] = x[k] - g * x[k] + shift[k];
      nr2 += x[k] * x[k];
    }
    if (!(nr2 <= guard_sq)) {
      *bad = i;
      return false;
    }
  }
  return true;
}

[[noreturn]] void throw_divergence(double t, std::size_t index);

}  // namespace detail

/// One Euler-Maruyama step x <- x - grad U(x) dt + sqrt(eps) dW, with the
/// same dW for every point. With eps = 0 this is bitwise one ode_flow step.
void sde_step(const RadialPotential& p, Ensemble& ensemble, std::span<const double> dW, double dt,
              double guard = FlowOptions{}.guard);

template <NoiseSource N>
void sde_step(const RadialPotential& p, Ensemble& ensemble, N& noise, double guard = FlowOptions{}.guard) {
  std::array<double, 8> dw{};
  noise.next_increment(std::span<double>(dw.data(), static_cast<std::size_t>(noise.dim())));
  sde_step(p, ensemble, std::span<const double>(dw.data(), static_cast<std::size_t>(ensemble.dim)),
           noise.dt(), guard);
}

/// Accelerated Cartesian step for Y_t = X_{t/eps}: dY = -(1/eps) grad U(Y) dt + dW~.
void accelerated_step(const RadialPotential& p, double eps, std::span<double> y,
                      std::span<const double> dW, double dt);

struct PolarState {
  double r_sq = 1.0;
  double phi = 0.0;  // unwrapped
  double t = 0.0;
};

struct PolarOptions {
  double floor = FlowOptions{}.polar_floor;
  // When false the radial equation drops its martingale term together with
  // its Ito correction (+2 dt); the angle still sees the noise.
  bool radial_noise = true;
};

/// One Euler-Maruyama step of the accelerated polar pair (R^2, phi):
///   d R^2 = -(4/eps) R^2 u'(R^2) dt + 2R (cos phi dW1 + sin phi dW2) + 2 dt
///   d phi = (1/R)(-sin phi dW1 + cos phi dW2)
PolarState polar_step(const RadialPotential& p, const PolarState& state, double eps,
                      std::span<const double> dW, double dt, const PolarOptions& opts = {});

struct CircleState {
  double z = 0.0;  // unwrapped
  double t = 0.0;
};

/// dZ = -sin Z dW1 + cos Z dW2 (Ito), one Euler-Maruyama step.
inline CircleState circle_step(const CircleState& s, std::span<const double> dW, double dt) {
  return {s.z - std::sin(s.z) * dW[0] + std::cos(s.z) * dW[1], s.t + dt};
}

/// Distance on R / 2 pi Z between two unwrapped angles, in [0, pi].
double circle_distance(double a, double b);

struct PullbackCloud {
  Ensemble cloud;            // image at time 0, origin-excluded points removed
  std::size_t excluded = 0;  // grid points dropped for starting near the origin
  std::int64_t steps = 0;    // steps taken from -T_pullback to 0
};

/// Runs the shared-noise flow of `grid` from time -T_pullback to 0, drawing
/// increments -steps..-1 of `base` through a ShiftView. Points that start
/// within opts.origin_exclusion of 0 are dropped before the run.
PullbackCloud pullback_attractor_sample(const RadialPotential& p, double eps, const NoisePath& base,
                                        double T_pullback, const Ensemble& grid,
                                        const FlowOptions& opts = {});

/// CSV rows `t,point_id,x1,...,xd` for every point of the ensemble.
void write_ensemble_rows(std::ostream& os, const Ensemble& e);
void write_ensemble_header(std::ostream& os, int dim);
/// CSV row `t,r_sq,phi,z`.
void write_polar_row(std::ostream& os, const PolarState& s, double z);

}  // namespace gradsync
