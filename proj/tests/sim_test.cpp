#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include <boost/math/distributions/normal.hpp>

#include "stratex/asymmetric.hpp"
#include "stratex/sim.hpp"
#include "stratex/symmetric.hpp"

using namespace stratex;

namespace {
const ModelParams kCrc = ModelParams::from_rho_theta(2, -1, 2);

SimConfig small(std::size_t paths, double a0 = 0.0) {
  SimConfig cfg;
  cfg.n_paths = paths;
  cfg.a0 = a0;
  cfg.seed = 11;
  return cfg;
}

std::vector<double> cutoff_standards(double theta, double a_bar, std::size_t paths, double a0 = 0.0) {
  const auto p = ModelParams::from_rho_theta(2.0, theta, 1);
  SimConfig cfg = small(paths, a0);
  cfg.horizon = 5.0;
  cfg.until_stopped = true;
  return simulate(p, StrategyProfile({Strategy::cutoff(a_bar)}), cfg).standard;
}
}  // namespace

TEST(Simulate, IdleProfileEarnsExactlyOne) {
  SimConfig cfg = small(50, 0.7);
  cfg.s0 = 1.5;
  const auto res = simulate(kCrc, StrategyProfile({Strategy(), Strategy()}), cfg);
  EXPECT_EQ(res.mean[0], 1.0);
  EXPECT_EQ(res.mean[1], 1.0);
  EXPECT_EQ(res.std_error[0], 0.0);
  for (double s : res.standard) EXPECT_EQ(s, 1.5);
  EXPECT_EQ(res.absorbed, 50u);
}

TEST(Simulate, StartBeyondThresholdNeverExplores) {
  const auto coop = StrategyProfile(std::vector<Strategy>(2, Strategy::cutoff(cooperative_cutoff(kCrc, 2))));
  const auto res = simulate(kCrc, coop, small(100, 3.0));
  for (double s : res.standard) EXPECT_EQ(s, 0.0);
  for (double x : res.exploration) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(res.mean[0], 1.0);
}

TEST(Simulate, Deterministic) {
  const auto eq = solve_symmetric(kCrc, 2);
  SimConfig cfg = small(64);
  cfg.horizon = 3.0;
  const auto a = simulate(kCrc, eq.profile(), cfg);
  const auto b = simulate(kCrc, eq.profile(), cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard, b.standard);
  cfg.seed = 12;
  EXPECT_NE(simulate(kCrc, eq.profile(), cfg).mean, a.mean);
}

TEST(Simulate, PathStreamsDoNotDependOnPathCount) {
  const auto coop = StrategyProfile({Strategy::cutoff(cooperative_cutoff(kCrc, 1))});
  SimConfig cfg = small(10);
  cfg.horizon = 20.0;
  cfg.keep_paths = true;
  const auto a = simulate(kCrc, coop, cfg);
  cfg.n_paths = 25;
  const auto b = simulate(kCrc, coop, cfg);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(a.path_payoffs[0][i], b.path_payoffs[0][i]);
    EXPECT_EQ(a.standard[i], b.standard[i]);
  }
}

TEST(Simulate, ThreadCountDoesNotChangeResults) {
  const auto coop = StrategyProfile({Strategy::cutoff(cooperative_cutoff(kCrc, 1))});
  SimConfig cfg = small(40);
  cfg.horizon = 20.0;
  ::setenv("EXPLORATION_EQ_THREADS", "1", 1);
  const auto a = simulate(kCrc, coop, cfg);
  ::setenv("EXPLORATION_EQ_THREADS", "4", 1);
  const auto b = simulate(kCrc, coop, cfg);
  ::unsetenv("EXPLORATION_EQ_THREADS");
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Simulate, CooperativeMatchesClosedForm) {
  // At kCrc the payoff has a tail index below 2, so the SE is unreliable there.
  const auto p = ModelParams::from_rho_theta(0.5, -1, 2);
  const auto sol = solve_cooperative(p, 2);
  const auto profile = StrategyProfile(std::vector<Strategy>(2, sol.strategy()));
  for (double a0 : {0.0, 0.5 * sol.a_star}) {
    const auto res = simulate(p, profile, small(4000, a0));
    EXPECT_NEAR(res.mean[0], sol.value(a0), 3.0 * res.std_error[0]) << a0;
    EXPECT_LT(res.truncation_bound, 1e-4);
  }
}

TEST(Simulate, AntitheticPairs) {
  const auto sol = solve_cooperative(kCrc, 1);
  SimConfig cfg = small(2000);
  cfg.antithetic = true;
  const auto res = simulate(kCrc, StrategyProfile({sol.strategy()}), cfg);
  EXPECT_NEAR(res.mean[0], sol.value(0.0), 3.0 * res.std_error[0]);
  cfg.n_paths = 2001;
  EXPECT_THROW(simulate(kCrc, StrategyProfile({sol.strategy()}), cfg), Error);
}

TEST(Simulate, OvershootSchemeAgreesLoosely) {
  const auto sol = solve_cooperative(kCrc, 1);
  SimConfig cfg = small(2000);
  cfg.scheme = ReflectionScheme::Overshoot;
  const auto res = simulate(kCrc, StrategyProfile({sol.strategy()}), cfg);
  EXPECT_NEAR(res.mean[0], sol.value(0.0), 4.0 * res.std_error[0] + 0.05);
}

TEST(Simulate, RejectsBadConfig) {
  const StrategyProfile idle({Strategy()});
  SimConfig cfg = small(0);
  EXPECT_THROW(simulate(kCrc, idle, cfg), Error);
  cfg = small(10);
  cfg.dt = 0.0;
  EXPECT_THROW(simulate(kCrc, idle, cfg), Error);
  cfg = small(10);
  cfg.horizon = 1e-4;
  EXPECT_THROW(simulate(kCrc, idle, cfg), Error);
}

TEST(Truncation, DriftlessRunningMaximum) {
  // With mu = 0 the running maximum is |N(0, sigma^2 x)|.
  const boost::math::normal_distribution<double> z;
  for (double x : {0.1, 1.0, 4.0}) {
    const double s = 1.3 * std::sqrt(x);
    EXPECT_NEAR(expected_exp_running_max(0.0, 1.3, x), 2.0 * std::exp(0.5 * s * s) * boost::math::cdf(z, s), 1e-9);
  }
  EXPECT_EQ(expected_exp_running_max(-1.0, 1.0, 0.0), 1.0);
}

TEST(Truncation, BoundFallsWithHorizon) {
  EXPECT_GT(truncation_bound(kCrc, 2, 0.0), 1.0);
  EXPECT_GT(truncation_bound(kCrc, 2, 5.0), truncation_bound(kCrc, 2, 10.0));
  const double t = auto_horizon(kCrc, 2, 1e-4);
  EXPECT_LE(truncation_bound(kCrc, 2, t), 1e-4);
  EXPECT_GT(truncation_bound(kCrc, 2, 0.9 * t), 1e-4);
}

TEST(Truncation, NeedsTheAssumption) {
  const auto p = ModelParams::from_rho_theta(2, 1, 2);
  EXPECT_EQ(truncation_bound(p, 2, 10.0), kInf);
  try {
    auto_horizon(p, 2, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AssumptionViolated);
  }
}

TEST(LongRun, ZeroThresholdIsAPointMass) {
  const std::vector<double> samples(1000, 0.25);
  const auto t = longrun_test(samples, -1.0, 0.0, 0.0, 0.25);
  EXPECT_TRUE(t.passed());
  EXPECT_EQ(t.point_mass_observed, 1.0);
}

TEST(LongRun, NeedsEnoughSamples) {
  try {
    longrun_test(std::vector<double>(999, 0.0), 0.0, 2.0, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSamples);
  }
}

TEST(LongRun, ExponentialTailWithoutDrift) {
  const auto t = longrun_test(cutoff_standards(0.0, 2.0, 10000), 0.0, 2.0, 0.0, 0.0);
  EXPECT_TRUE(t.ks_ok) << t.ks_distance << " vs " << t.ks_critical;
  EXPECT_TRUE(t.point_mass_ok);
  EXPECT_NEAR(t.ks_critical * std::sqrt(static_cast<double>(t.tail_count)), 1.6276, 1e-3);
}

TEST(LongRun, TailMeanWithNegativeDrift) {
  const auto samples = cutoff_standards(-1.0, 2.0, 4000);
  const auto t = longrun_test(samples, -1.0, 2.0, 0.0, 0.0);
  const double mean = 1.0 - std::exp(-2.0);
  EXPECT_NEAR(t.tail_mean, mean, 3.0 * mean / std::sqrt(static_cast<double>(t.tail_count)));
  EXPECT_TRUE(t.passed());
}

TEST(LongRun, PointMassFromPositiveStart) {
  const auto samples = cutoff_standards(-1.0, 2.0, 4000, 0.5);
  const auto t = longrun_test(samples, -1.0, 2.0, 0.5, 0.0);
  EXPECT_NEAR(t.point_mass_expected, (1.0 - std::exp(-0.5)) / (1.0 - std::exp(-2.0)), 1e-12);
  EXPECT_TRUE(t.passed()) << t.binomial_z << " " << t.ks_distance;
}

TEST(LongRun, DetectsWrongThreshold) {
  const auto t = longrun_test(cutoff_standards(0.0, 2.0, 4000), 0.0, 1.0, 0.0, 0.0);
  EXPECT_FALSE(t.ks_ok);
}

TEST(Q, ClosedForm) {
  const double lambda = kCrc.lambda(2);
  EXPECT_EQ(q_closed_form(kCrc, 2, 0.0, 0.0), 0.0);
  EXPECT_GE(q_closed_form(kCrc, 2, 10.0 / lambda, 0.0), 1.0 - std::exp(-10.0) - 1e-15);
  double prev = 0.0;
  for (double a = 0.0; a < 5.0; a += 0.25) {
    const double q = q_closed_form(kCrc, 2, a, 0.0);
    EXPECT_GE(q, prev);
    prev = q;
  }
  EXPECT_THROW(q_closed_form(ModelParams::from_rho_theta(2, 1, 2), 2, 1.0, 0.0), Error);
}

TEST(Q, PathwiseIsNotBelowClosedForm) {
  const auto eq = solve_symmetric(kCrc, 2);
  const auto q = q_estimate(kCrc, 2, eq.a_tilde, 0.0, 2000, 5);
  EXPECT_GE(q.pathwise, q.closed_form - 3.0 * q.pathwise_se);
  EXPECT_LE(q.pathwise, 1.0);
  const auto none = q_estimate(kCrc, 2, 0.0, 0.0, 200, 5);
  EXPECT_EQ(none.pathwise, 0.0);
}
