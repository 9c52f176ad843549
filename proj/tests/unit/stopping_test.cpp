#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gradsync/error.hpp"
#include "gradsync/fit.hpp"
#include "gradsync/stopping.hpp"

using namespace gradsync;

namespace {

const RadialPotential P = RadialPotential::quartic(0.5);

Ensemble points(std::initializer_list<std::array<double, 2>> xs, double eps) {
  Ensemble e(2, eps);
  for (const auto& x : xs) e.add(x);
  return e;
}

bool on_step_grid(double t, double dt) { return std::abs(t / dt - std::round(t / dt)) < 1e-6; }

}  // namespace

TEST(Diameter, ExactPairwise) {
  const auto e = points({{0, 0}, {3, 4}, {1, 1}, {-1, 0}}, 0.0);
  EXPECT_DOUBLE_EQ(diameter(e, 0, e.size()), std::hypot(4.0, 4.0));
  EXPECT_TRUE(diameter_at_most(e, 0, e.size(), std::hypot(4.0, 4.0)));
  EXPECT_FALSE(diameter_at_most(e, 0, e.size(), 5.6));
  EXPECT_TRUE(diameter_at_most(e, 2, 3, 0.0));
}

TEST(Annulus, OpenBounds) {
  const Annulus D(0.5, 2.0);
  EXPECT_FALSE(D.contains_sq(0.25));
  EXPECT_TRUE(D.contains_sq(1.0));
  EXPECT_FALSE(D.contains_sq(4.0));
  const Annulus all(0.0, ExtendedRadius::infinity());
  EXPECT_TRUE(all.contains_sq(1e300));
  EXPECT_THROW(Annulus(2.0, 1.0), PreconditionError);
}

TEST(ExitTime, NoiselessSphereNeverLeaves) {
  NoisePath noise(1, 0, 1e-3, 2);
  const auto rec = exit_time(P, Ensemble::sphere_sample(2, 32, 1.0, 0.0), Annulus(0.5, 2.0), noise, 5.0);
  EXPECT_TRUE(rec.censored());
  EXPECT_EQ(rec.horizon, 5.0);
  EXPECT_EQ(rec.kind, StopKind::ExitAnnulus);
}

TEST(ExitTime, StartOutsideIsAPreconditionError) {
  NoisePath noise(1, 0, 1e-3, 2);
  EXPECT_THROW(exit_time(P, points({{0.6, 0.0}}, 0.0), Annulus(0.5, 0.59), noise, 1.0), PreconditionError);
}

TEST(ExitTime, MeanAtQuarterNoiseWithinArrheniusBracket) {
  // 32 fixed points of S_1, D_{0.3,2}, 200 replicas; bracket exp(V/eps -+ 1).
  const double eps = 0.25, V = quasi_potential(P, 0.3, 1.0, 2.0);
  std::vector<double> t;
  for (int r = 0; r < 200; ++r) {
    NoisePath noise(1, cell_stream(0, r), 1e-3, 2);
    const auto rec = exit_time(P, Ensemble::sphere_sample(2, 32, 1.0, eps), Annulus(0.3, 2.0), noise,
                               default_horizon(P, eps));
    t.push_back(rec.time_or_horizon());
  }
  const double m = mean(t);
  EXPECT_GE(m, std::exp(V / eps - 1.0));
  EXPECT_LE(m, std::exp(V / eps + 1.0));
}

TEST(ExitTime, WiderAnnulusNeverExitsEarlier) {
  for (int r = 0; r < 20; ++r) {
    NoisePath a(4, r, 1e-3, 2), b(4, r, 1e-3, 2);
    const auto M = Ensemble::sphere_sample(2, 16, 1.0, 0.3);
    const auto narrow = exit_time(P, M, Annulus(0.5, 1.5), a, 200.0);
    const auto wide = exit_time(P, M, Annulus(0.3, 2.0), b, 200.0);
    EXPECT_GE(wide.time_or_horizon(), narrow.time_or_horizon()) << r;
  }
}

TEST(ExitTime, TimesAreStepMultiples) {
  NoisePath noise(2, 0, 1e-3, 2);
  const auto rec = exit_time(P, Ensemble::sphere_sample(2, 16, 1.0, 0.5), Annulus(0.5, 1.5), noise, 100.0);
  ASSERT_FALSE(rec.censored());
  EXPECT_TRUE(on_step_grid(*rec.time, 1e-3));
  EXPECT_EQ(rec.steps, std::llround(*rec.time / 1e-3));
}

TEST(EntryTime, NoiselessRelaxation) {
  NoisePath noise(1, 0, 1e-3, 2);
  const auto rec = entry_time(P, points({{2, 0}, {0, 3}}, 0.0), Annulus(0.9, 1.1), noise, 50.0);
  ASSERT_FALSE(rec.censored());
  EXPECT_LE(*rec.time, 10.0);
  EXPECT_TRUE(on_step_grid(*rec.time, 1e-3));
}

TEST(EntryTime, RefiningTheStepMovesTimeByAtMostTenSteps) {
  NoisePath coarse(1, 0, 1e-3, 2), fine(1, 0, 1e-4, 2);
  FlowOptions fo;
  fo.dt = 1e-4;
  const auto a = entry_time(P, points({{2, 0}, {0, 3}}, 0.0), Annulus(0.9, 1.1), coarse, 50.0);
  const auto b = entry_time(P, points({{2, 0}, {0, 3}}, 0.0), Annulus(0.9, 1.1), fine, 50.0, fo);
  ASSERT_TRUE(a.time && b.time);
  EXPECT_LE(std::abs(*a.time - *b.time), 10.0 * 1e-3);
}

TEST(EntryTime, AlreadyInsideIsZero) {
  NoisePath noise(1, 0, 1e-3, 2);
  const auto rec = entry_time(P, points({{1, 0}, {0, -1}}, 0.2), Annulus(0.9, 1.1), noise, 5.0);
  ASSERT_TRUE(rec.time.has_value());
  EXPECT_EQ(*rec.time, 0.0);
}

TEST(EntryTime, OriginNeverEnters) {
  NoisePath noise(1, 0, 1e-3, 2);
  const auto rec = entry_time(P, points({{0, 0}, {2, 0}}, 0.0), Annulus(0.5, 1.5), noise, 5.0);
  EXPECT_TRUE(rec.censored());
}

TEST(EntryTime, WiderAnnulusNeverEntersLater) {
  for (int r = 0; r < 20; ++r) {
    NoisePath a(6, r, 1e-3, 2), b(6, r, 1e-3, 2);
    const auto M = points({{2, 0}, {0, 0.3}, {-1.5, 1.5}}, 0.2);
    const auto narrow = entry_time(P, M, Annulus(0.9, 1.1), a, 50.0);
    const auto wide = entry_time(P, M, Annulus(0.8, 1.3), b, 50.0);
    EXPECT_LE(wide.time_or_horizon(), narrow.time_or_horizon()) << r;
  }
}

TEST(SyncTime, IdenticalPointsAreSyncedAtZero) {
  NoisePath noise(1, 0, 1e-3, 2);
  auto e = points({{0.3, 0.4}, {0.3, 0.4}}, 0.2);
  const SyncCriterion c{0, 2, 1e-9};
  const auto hit = run_sync(P, e, noise, std::span<const SyncCriterion>(&c, 1), 100);
  ASSERT_TRUE(hit[0].has_value());
  EXPECT_EQ(*hit[0], 0);
  const double x[2] = {0.1, 0.2};
  EXPECT_EQ(two_point_sync_time(P, 0.2, x, x, 0.1, noise, 1.0).time, 0.0);
}

TEST(SyncTime, NoiselessSphereNeverSyncs) {
  NoisePath noise(1, 0, 1e-3, 2);
  EXPECT_TRUE(sphere_sync_time(P, 0.0, 64, 1.9, noise, 5.0).censored());
}

TEST(SyncTime, SphereMedianAtPointThreeNearExponential) {
  std::vector<double> t;
  for (int r = 0; r < 100; ++r) {
    NoisePath noise(1, cell_stream(0, r), 1e-3, 2);
    t.push_back(sphere_sync_time(P, 0.3, 64, 0.2, noise, default_horizon(P, 0.3)).time_or_horizon());
  }
  const double target = std::exp(1.0 / 0.3), med = median(t);
  EXPECT_GE(med, target / 3.0);
  EXPECT_LE(med, target * 3.0);
}

TEST(SyncTime, GridProxyFiniteAtPointThree) {
  NoisePath noise(1, 0, 1e-3, 2);
  const auto rec = grid_sync_time(P, 0.3, Ensemble::square_grid(15, 1.5), 0.2, noise, std::exp(1.0 / 0.3) * 100.0);
  EXPECT_FALSE(rec.censored());
}

TEST(SyncTime, GridProxyRefusesNonContracting) {
  NoisePath noise(1, 0, 1e-3, 2);
  EXPECT_THROW(grid_sync_time(RadialPotential::shifted_quadratic(0.5), 0.3, Ensemble::square_grid(15, 1.5), 0.2,
                              noise, 10.0),
               PreconditionError);
  EXPECT_THROW(grid_sync_time(P, 0.3, Ensemble::square_grid(5, 0.5), 0.2, noise, 10.0), PreconditionError);
}

TEST(SyncTime, SingletonGridIsSynced) {
  NoisePath noise(1, 0, 1e-3, 2);
  Ensemble one(2, 0.3);
  const double x[2] = {0.0, 0.0};
  one.add(x);
  // A single point cannot cover the contraction ball; run_sync carries the
  // degenerate case.
  const SyncCriterion c{0, 1, 0.2};
  EXPECT_EQ(*run_sync(P, one, noise, std::span<const SyncCriterion>(&c, 1), 10)[0], 0);
}

TEST(SyncTime, SandwichAndDoublingOnSharedNoise) {
  const auto grid = Ensemble::square_grid(15, 1.5);
  for (bool refined : {false, true}) {
    const CurveRefinement ref{0.1, 0.01, 10, 1u << 16};
    for (int r = 0; r < 5; ++r) {
      NoisePath noise(3, r, 1e-3, 2);
      const auto m = measure_set_sync(P, 0.3, 64, 0.2, &grid, noise, 2000.0, {}, refined ? &ref : nullptr);
      ASSERT_TRUE(m.grid.has_value());
      ASSERT_FALSE(m.grid->censored());
      EXPECT_LE(m.sphere_doubled.time_or_horizon(), m.sphere.time_or_horizon());
      EXPECT_LE(m.sphere_doubled.time_or_horizon(), m.grid->time_or_horizon());
      EXPECT_LE(m.sphere.time_or_horizon(), m.grid->time_or_horizon());
    }
  }
}

TEST(PointApproach, WithinReachOfEveryProxyPointIsZero) {
  NoisePath noise(1, 0, 1e-3, 2);
  const double x[2] = {2.0, 0.0};
  AttractorProxySpec proxy;
  proxy.pullback_time = 5.0;
  const auto t = point_to_attractor_times(P, 0.2, x, 10.0, proxy, noise, 10.0);
  EXPECT_EQ(t.lower.time, 0.0);
  EXPECT_EQ(t.upper.time, 0.0);
}

TEST(PointApproach, LowerNeverExceedsUpper) {
  AttractorProxySpec proxy;
  proxy.pullback_time = 200.0;
  const double x[2] = {2.0, 0.0};
  for (int r = 0; r < 10; ++r) {
    NoisePath noise(5, r, 1e-3, 2);
    const auto t = point_to_attractor_times(P, 0.2, x, 0.2, proxy, noise, 500.0);
    EXPECT_LE(t.lower.time_or_horizon(), t.upper.time_or_horizon());
    EXPECT_EQ(t.lower.kind, StopKind::PointToAttractorLower);
    EXPECT_EQ(t.upper.kind, StopKind::PointToAttractorUpper);
  }
}

TEST(PointApproach, EmptyProxyRaises) {
  NoisePath noise(1, 0, 1e-3, 2);
  AttractorProxySpec proxy;
  proxy.grid = Ensemble(2, 0.0);
  const double origin[2] = {0.0, 0.0};
  proxy.grid.add(origin);
  const double x[2] = {2.0, 0.0};
  EXPECT_THROW(point_to_attractor_times(P, 0.2, x, 0.2, proxy, noise, 10.0), ProxyEmpty);
}

TEST(StoppingCsv, PinnedColumns) {
  std::ostringstream os;
  write_stopping_header(os);
  EXPECT_EQ(os.str(), "kind,eps,delta,r_inner,r_outer,n_points,time,censored,horizon,seed,stream_id\n");
}

TEST(DefaultHorizon, TenTimesExponential) {
  EXPECT_NEAR(default_horizon(P, 0.25), 10.0 * std::exp(4.0), 1e-9);
}
