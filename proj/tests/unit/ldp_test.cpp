#include <cmath>

#include <gtest/gtest.h>

#include "gradsync/error.hpp"
#include "gradsync/ldp.hpp"
#include "gradsync/stopping.hpp"

using namespace gradsync;

namespace {

const RadialPotential P = RadialPotential::quartic(0.5);

// Built once; construction integrates the reversed flow and the eta sweep.
const GAlphaResult& built_01() {
  static const GAlphaResult g = build_control_g_alpha(P, 0.1, 0.1);
  return g;
}

const VerificationReport& verified_01() {
  static const VerificationReport r = verify_control(P, built_01(), Ensemble::square_grid(4, 1.5));
  return r;
}

}  // namespace

TEST(Action, ZeroControl) {
  Control g(2);
  EXPECT_EQ(schilder_action(g), 0.0);
  g.append_constant(3.0, {0.0, 0.0});
  EXPECT_EQ(schilder_action(g), 0.0);
}

TEST(Action, ConstantPieceClosedForm) {
  Control g(2);
  g.append_constant(2.0, {0.3, 0.0});
  EXPECT_NEAR(schilder_action(g), 0.09, 1e-15);
}

TEST(Action, AdditiveOverRestrictions) {
  Control g(2);
  g.append_constant(0.7, {1.0, -2.0});
  g.append_constant(1.3, {0.5, 0.1});
  g.append_sampled({0.0, 0.4, 1.0}, {0.0, 1.0, 2.0, 2.0, -1.0, 0.0});
  const double T = g.end_time();
  double sum = 0.0;
  for (double s = 0.0; s < T; s += 0.25) sum += schilder_action(g, s, std::min(T, s + 0.25));
  EXPECT_NEAR(sum, schilder_action(g), 1e-12);
}

TEST(Action, QuadraticUnderScaling) {
  Control g(2);
  g.append_constant(1.1, {0.2, 0.9});
  g.append_sampled({0.0, 0.5}, {1.0, 0.0, 0.0, 1.0});
  for (double c : {0.0, 0.5, -2.0, 3.0}) EXPECT_NEAR(schilder_action(g.scaled(c)), c * c * schilder_action(g), 1e-12);
}

TEST(Action, LinearSampledProfile) {
  // h(t) = 2t on [0, 1]: 1/2 int 4 t^2 = 2/3, and g(1) = 1.
  Control g(1);
  g.append_sampled({0.0, 1.0}, {0.0, 2.0});
  EXPECT_NEAR(schilder_action(g), 2.0 / 3.0, 1e-15);
  double end[1];
  g.g(1.0, end);
  EXPECT_NEAR(end[0], 1.0, 1e-15);
}

TEST(ActionGap, StationaryTrajectory) {
  Control g(2);
  g.append_constant(1.0, {0.0, 0.0});
  const double x0[2] = {0.0, 1.0};
  const auto phi = controlled_flow(P, g, x0, 1e-3);
  EXPECT_NEAR(action_potential_gap(P, phi, 0.0, 1.0), 0.0, 1e-12);
}

TEST(ControlBuild, ClosedFormRadii) {
  const auto& s = built_01().schedule;
  EXPECT_NEAR(s.c2, std::sqrt(1.2), 1e-9);
  EXPECT_NEAR(s.c1, std::max(0.9, std::sqrt(0.9)), 1e-9);
}

TEST(ControlBuild, AlphaTooLarge) {
  // Quartic a = 0.1 has u'(4) = 0.6, so alpha = 0.4 breaks u'(4) >= 2 alpha.
  EXPECT_THROW(build_control_g_alpha(RadialPotential::quartic(0.1), 0.4, 0.1), AlphaTooLarge);
  EXPECT_THROW(build_control_g_alpha(P, 1.6, 0.1), PreconditionError);
}

TEST(ControlBuild, PhaseActionBounds) {
  const auto& s = built_01().schedule;
  const double a = 0.1;
  EXPECT_LE(s.per_phase_action[1], (3 * a) * (3 * a) * 2.0);
  EXPECT_LE(s.per_phase_action[3], std::pow((-2.0 * P.du(0.0) + 1.0) * a, 2) * 2.0);
  EXPECT_LE(s.per_phase_action[6], std::pow(4.0 * a * s.c2, 2) * (s.T[7] - s.T[6]));
  EXPECT_EQ(s.per_phase_action[0], 0.0);
  EXPECT_EQ(s.per_phase_action[5], 0.0);
  for (int k = 1; k < 8; ++k) EXPECT_GE(s.T[k], s.T[k - 1]);
  EXPECT_NEAR(s.T[2] - s.T[1], 2.0, 1e-12);
  EXPECT_NEAR(s.T[4] - s.T[3], 2.0, 1e-12);
}

TEST(ControlBuild, ReversedFlowPhaseCostsTheBarrier) {
  const auto& s = built_01().schedule;
  // Along phi' = grad U~ the control 2 grad U~ costs exactly the potential gap.
  EXPECT_NEAR(s.per_phase_action[2], s.reversed_flow_gap, 1e-2);
  EXPECT_LE(s.per_phase_action[2], quasi_potential(P, 0.0, 1.0, ExtendedRadius::infinity()) + 1e-3);
  EXPECT_NEAR(s.reversed_flow_end, -0.1, 1e-12);
}

TEST(ControlVerify, SixteenPointsSynchronize) {
  const auto& r = verified_01();
  EXPECT_TRUE(r.passed()) << (r.first_failure() ? r.first_failure()->name : "");
  EXPECT_LE(r.final_diameter, 0.1);
}

TEST(ControlVerify, ActionMatchesIndependentIntegral) {
  EXPECT_NEAR(verified_01().total_action, schilder_action(built_01().control), 1e-9);
  EXPECT_NEAR(verified_01().schedule_action, built_01().schedule.total_action(), 1e-9);
}

TEST(ControlVerify, FixedPointDuringFinalPhase) {
  EXPECT_LE(verified_01().fixed_point_residual, verified_01().dt);
}

TEST(ControlVerify, FinalPhaseDiameterNonIncreasing) {
  const auto& d = verified_01().phase7_diameters;
  ASSERT_GE(d.size(), 10u);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_LE(d[i], d[i - 1] + 1e-12) << i;
}

TEST(ControlVerify, ActionDominatesPotentialGap) {
  EXPECT_GE(verified_01().min_gap_slack, -10.0 * verified_01().dt);
}
