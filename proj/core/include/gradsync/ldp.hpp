#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gradsync/flow.hpp"
#include "gradsync/potential.hpp"

namespace gradsync {

/// One piece of a control velocity h on [t_start, t_end]: either a constant
/// vector or a profile sampled at increasing absolute times (linear between
/// samples, so g is integrated by the trapezoid rule).
struct ControlPiece {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> velocity;       // dim entries, constant pieces
  std::vector<double> sample_times;   // sampled pieces; front() == t_start, back() == t_end
  std::vector<double> sample_values;  // dim entries per sample
  std::string label;

  bool sampled() const { return !sample_times.empty(); }
};

/// g(t) = int_0^t h(s) ds with g(0) = 0. Pieces are kept with their exact
/// boundaries; nothing is resampled onto a uniform grid.
class Control {
 public:
  explicit Control(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  double end_time() const { return pieces_.empty() ? 0.0 : pieces_.back().t_end; }
  const std::vector<ControlPiece>& pieces() const { return pieces_; }

  void append_constant(double duration, std::vector<double> h, std::string label = {});
  /// `offsets` are times relative to end_time(), starting at 0 and increasing.
  void append_sampled(std::vector<double> offsets, std::vector<double> values, std::string label = {});

  void velocity(double t, std::span<double> out) const;
  void g(double t, std::span<double> out) const;

  Control scaled(double c) const;

 private:
  std::size_t piece_index(double t) const;
  void g_within(std::size_t piece, double t, std::span<double> out) const;

  int dim_;
  std::vector<ControlPiece> pieces_;
  std::vector<std::vector<double>> g_start_;                 // g at each piece start
  std::vector<std::vector<double>> g_samples_;                // cumulative g at samples, per piece
};

/// I(g) = 1/2 int_0^T |h|^2, exact for constant pieces and for the linear
/// interpolation of sampled ones.
double schilder_action(const Control& g);
/// Action restricted to [s, t].
double schilder_action(const Control& g, double s, double t);

/// Recorded path of the controlled flow f' = -grad U(f) + h.
struct ControlledTrajectory {
  int dim = 0;
  std::vector<double> times;
  std::vector<double> states;

  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  /// Index of the recorded time closest to t.
  std::size_t index_at(double t) const;
};

/// Explicit Euler f <- f - grad U(f) dt + (g(t+dt) - g(t)) from t_from to
/// t_to; the last step is shortened to land on t_to exactly.
void controlled_advance(const RadialPotential& p, const Control& g, Ensemble& e, double t_from, double t_to,
                        double dt);

ControlledTrajectory controlled_flow(const RadialPotential& p, const Control& g, std::span<const double> x0,
                                     double dt, double t_end = -1.0);

/// 2 (U(phi(t)) - U(phi(s))): the action of any control producing phi on
/// [s, t] is bounded below by this.
double action_potential_gap(const RadialPotential& p, const ControlledTrajectory& phi, double s, double t);

struct ControlSchedule {
  double alpha = 0.0;
  double delta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double eta_raw = 0.0;              // sampled margin before halving
  std::array<double, 8> T{};         // T[0] = 0, T[1..7] phase ends
  std::array<double, 7> per_phase_action{};
  std::array<std::string, 7> h_description;
  double reversed_flow_end = 0.0;    // phi(T3 - T2) == -alpha
  double reversed_flow_gap = 0.0;    // 2 (U~(phi(end)) - U~(phi(0)))

  double total_action() const;
  double phase_start(int phase) const { return T[phase - 1]; }
  double phase_end(int phase) const { return T[phase]; }
};

struct GAlphaResult {
  ControlSchedule schedule;
  Control control{2};
};

struct BuildOptions {
  double dt = 1e-3;           // controlled-flow step for the sampled dynamics
  double reversed_dt = 1e-4;  // reversed-flow step
  std::size_t ring_samples = 2048;
  std::size_t ball_rings = 8;
  std::int64_t max_reversed_steps = 200'000'000;
  double max_settle_time = 1e4;
};

/// Builds the seven-phase control g^alpha in d = 2 (control along x1 only):
///   [0,T1] 0 | (T1,T2] 3a | (T2,T3] 2 grad U~(phi) | (T3,T4] (-2u'(0)+1)a
///   | (T4,T5] beta | (T5,T6] 0 | (T6,T7] 4 a c2
/// eta is estimated by flowing a ring of S_{1+a} through phases 2-4.
GAlphaResult build_control_g_alpha(const RadialPotential& p, double alpha, double delta,
                                   const BuildOptions& opts = {});

struct PhasePredicate {
  int step;
  std::string name;
  bool passed;
  double value;
  double bound;
};

struct VerificationReport {
  std::vector<PhasePredicate> predicates;
  double final_diameter = 0.0;
  double total_action = 0.0;     // schilder_action(control)
  double schedule_action = 0.0;  // sum of per-phase actions of the schedule
  std::array<double, 7> phase_action{};
  std::vector<double> phase7_times;
  std::vector<double> phase7_diameters;
  double min_gap_slack = 0.0;  // min over points, phases of action - gap
  double fixed_point_residual = 0.0;
  double dt = 0.0;

  bool passed() const;
  const PhasePredicate* first_failure() const;
};

struct VerifyOptions {
  double dt = 1e-3;
  bool strict = true;  // throw PhasePredicateFailed on the first failing step
};

VerificationReport verify_control(const RadialPotential& p, const GAlphaResult& built, const Ensemble& grid,
                                  const VerifyOptions& opts = {});

/// phase,t_start,t_end,h_description,action
void write_schedule_csv(std::ostream& os, const ControlSchedule& s);
void write_verification_report(std::ostream& os, const ControlSchedule& s, const VerificationReport& r);

}  // namespace gradsync
