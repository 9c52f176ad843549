#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "gradsync/error.hpp"
#include "gradsync/experiments.hpp"

using namespace gradsync;

namespace {

Campaign small_escape() {
  Campaign c = Campaign::defaults(CampaignKind::EscapeScaling);
  c.set_epsilons({0.6, 0.5, 0.4});
  c.replicas = 30;
  c.sphere_points = 8;
  c.refine_curve = false;
  c.jobs = 1;
  return c;
}

}  // namespace

TEST(Campaign, EpsilonsSortedDescendingAndUnique) {
  Campaign c;
  c.set_epsilons({0.1, 0.3, 0.2, 0.3});
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.3, 0.2, 0.1}));
}

TEST(Campaign, HorizonPolicies) {
  EXPECT_NEAR((HorizonPolicy{HorizonPolicy::Kind::Exponential, 10.0, 0.0}).horizon(0.25, 1.0), 10.0 * std::exp(4.0),
              1e-9);
  EXPECT_DOUBLE_EQ((HorizonPolicy{HorizonPolicy::Kind::Inverse, 100.0, 0.0}).horizon(0.05, 1.0), 2000.0);
  EXPECT_DOUBLE_EQ((HorizonPolicy{HorizonPolicy::Kind::Fixed, 0.0, 7.0}).horizon(0.05, 1.0), 7.0);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 42) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Escape, IndependentOfThreadCount) {
  Campaign a = small_escape(), b = small_escape();
  b.jobs = 3;
  const auto ra = escape_scaling(a), rb = escape_scaling(b);
  ASSERT_EQ(ra.records.size(), rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    EXPECT_EQ(ra.records[i].time, rb.records[i].time);
    EXPECT_EQ(ra.records[i].stream_id, rb.records[i].stream_id);
  }
  ASSERT_TRUE(ra.fit && rb.fit);
  EXPECT_EQ(ra.fit->slope, rb.fit->slope);
}

TEST(Escape, TooFewReplicas) {
  Campaign c = small_escape();
  c.replicas = 5;
  EXPECT_THROW(escape_scaling(c), TooFewReplicas);
  const auto r = escape_scaling(c, false);
  EXPECT_TRUE(r.flagged());
}

TEST(Escape, SingleEpsilonCannotBeFitted) {
  Campaign c = small_escape();
  c.set_epsilons({0.5});
  EXPECT_THROW(escape_scaling(c), NoFitPossible);
}

TEST(Escape, TooCensoredUnderShortHorizon) {
  Campaign c = small_escape();
  c.horizon = {HorizonPolicy::Kind::Fixed, 0.0, 0.01};
  EXPECT_THROW(escape_scaling(c), TooCensored);
}

TEST(Escape, WiderAnnulusRaisesMeanExitTime) {
  Campaign narrow = small_escape(), wide = small_escape();
  narrow.r_inner = 0.4;
  narrow.r_outer = 1.8;
  wide.r_inner = 0.3;
  wide.r_outer = 2.0;
  const auto rn = escape_scaling(narrow), rw = escape_scaling(wide);
  for (std::size_t i = 0; i < rn.rows.size(); ++i) EXPECT_GT(rw.rows[i].mean, rn.rows[i].mean) << rn.rows[i].eps;
  for (std::size_t i = 0; i < rn.records.size(); ++i)
    EXPECT_GE(rw.records[i].time_or_horizon(), rn.records[i].time_or_horizon());
}

TEST(Lyapunov, ZeroNoiseGivesZero) {
  const auto r = lyapunov_circle(1000.0, 1e-2, 4, 1, 0.0, 1);
  EXPECT_EQ(r.lambda, 0.0);
}

TEST(Lyapunov, HalvingTheStepStaysWithinTheInterval) {
  const auto a = lyapunov_circle(1000.0, 1e-3, 16, 1, 1.0, 1);
  const auto b = lyapunov_circle(1000.0, 5e-4, 16, 1, 1.0, 1);
  EXPECT_LT(std::abs(a.lambda - b.lambda), 2.0 * std::max(a.ci_half_width, b.ci_half_width));
}

TEST(Lyapunov, IntervalShrinksLikeInverseRootT) {
  // 256 replicas keep the spread of each sample deviation near 4%.
  const auto a = lyapunov_circle(250.0, 1e-2, 256, 3, 1.0, 1);
  const auto b = lyapunov_circle(1000.0, 1e-2, 256, 3, 1.0, 1);
  EXPECT_LE(b.ci_half_width, 0.5 * a.ci_half_width * 1.2);
}

TEST(CircleSync, ZeroSeparationStaysZero) {
  const auto r = circle_sync_rate(0.0, 5.0, 1e-3, 4, 1, 1);
  EXPECT_EQ(r.max_distance, 0.0);
}

TEST(Gronwall, NoRadialNoiseTracksTheCircleExactly) {
  Campaign c = Campaign::defaults(CampaignKind::GronwallComparison);
  c.radial_noise = false;
  c.replicas = 10;
  c.jobs = 1;
  const auto r = gronwall_comparison(c);
  for (const auto& row : r.rows) EXPECT_LE(row.median_angle_dev, 10.0 * c.flow.dt_accelerated) << row.eps;
}

TEST(ExitProbability, WholePlaneGivesBoundOnly) {
  Campaign c = Campaign::defaults(CampaignKind::ExitProbability);
  c.r_inner = 0.0;
  c.r_outer = ExtendedRadius::infinity();
  c.replicas = 200;
  c.jobs = 1;
  const auto r = exit_probability(c);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.exits, 0u);
    EXPECT_TRUE(row.bound_only);
    EXPECT_GT(row.wilson.hi, 0.0);
  }
}

TEST(Consistency, PolarAndCartesianAgreeOnShortRuns) {
  const auto r = polar_cartesian_consistency(RadialPotential::quartic(), 0.1, 0.2, 1e-4, 3, 1, 1);
  EXPECT_LE(r.worst, 0.05);
}

TEST(ActionSweep, SmallSweepHasNoFailures) {
  const auto r = action_inequality_sweep(RadialPotential::quartic(), 10, 5);
  EXPECT_EQ(r.checks.size(), 10u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_DOUBLE_EQ(r.tolerance, 1e-2);
}
