#include <gtest/gtest.h>

#include <cmath>

#include "stratex/asymmetric.hpp"
#include "stratex/verify.hpp"

using namespace stratex;

namespace {
const ModelParams kCrc = ModelParams::from_rho_theta(2, -1, 2);

double sup_error(const DpResult& dp, const PiecewiseValue& u) {
  double err = 0.0;
  for (std::size_t i = 0; i < dp.a.size(); ++i) err = std::max(err, std::abs(dp.u[i] - u(dp.a[i])));
  return err;
}
}  // namespace

TEST(Check, EquilibriaPass) {
  for (int n : {2, 3, 4}) {
    const auto rep = check_equilibrium(solve_symmetric(kCrc, n));
    EXPECT_TRUE(rep.passed()) << n;
    EXPECT_TRUE(rep.best_response_violations.empty());
  }
  EXPECT_TRUE(check_equilibrium(construct_equilibrium(kCrc, 2)).passed());
}

TEST(Check, CooperativeProfileIsNotAnEquilibrium) {
  const auto coop = cooperative_profile(kCrc, 2);
  const auto u = solve_cooperative(kCrc, 2).value;
  const auto rep = check_equilibrium(kCrc, coop, {u, u});
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(rep.conditions_hold());
  EXPECT_GT(rep.hjb_max_residual.measured, 1e-3);
}

TEST(Check, FreeRidingFailsSmoothPasting) {
  const auto profile = free_ride_profile(kCrc, 2);
  const std::vector<PiecewiseValue> pays{profile_payoff(kCrc, profile, 0), profile_payoff(kCrc, profile, 1)};
  const auto rep = check_equilibrium(kCrc, profile, pays);
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(rep.everyone_explores);
  EXPECT_GT(rep.smooth_pasting.measured, 0.1);
  EXPECT_FALSE(rep.best_response_violations.empty());
}

TEST(Check, ViolationListIsCapped) {
  const auto profile = free_ride_profile(kCrc, 2);
  const std::vector<PiecewiseValue> pays{profile_payoff(kCrc, profile, 0), profile_payoff(kCrc, profile, 1)};
  const auto rep = check_equilibrium(kCrc, profile, pays, 1000, 1e-5, 10);
  EXPECT_LE(rep.best_response_violations.size(), 10u);
  EXPECT_FALSE(rep.best_response.passed);
}

TEST(ProfilePayoff, CooperativeMatchesClosedForm) {
  const auto coop = cooperative_profile(kCrc, 2);
  const auto exact = solve_cooperative(kCrc, 2).value;
  const auto u = profile_payoff(kCrc, coop, 0);
  for (double a = 0.0; a < 3.0; a += 0.05) EXPECT_NEAR(u(a), exact(a), 1e-7) << a;
}

TEST(ProfilePayoff, AsymmetricMatchesConstruction) {
  const auto eq = construct_equilibrium(kCrc, 2);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto u = profile_payoff(kCrc, eq.profile, m);
    for (double a = 0.0; a < eq.average.a_flat + 0.5; a += 0.02) EXPECT_NEAR(u(a), eq.payoffs[m](a), 1e-6) << m << " " << a;
  }
}

TEST(ProfilePayoff, NeedsPositiveIntensity) {
  const StrategyProfile idle(std::vector<Strategy>{Strategy(), Strategy()});
  EXPECT_EQ(profile_payoff(kCrc, idle, 0)(0.0), 1.0);
  const StrategyProfile gap({Strategy({StrategyPiece{0.0, 0.5, ConstantAction{1.0}}, StrategyPiece{0.5, 1.0, ConstantAction{0.0}},
                                        StrategyPiece{1.0, 2.0, ConstantAction{1.0}}})});
  EXPECT_THROW(profile_payoff(kCrc, gap, 0), Error);
}

TEST(Dp, SingleAgentValue) {
  const auto one = solve_cooperative(kCrc, 1);
  const auto dp = dp_best_response(kCrc, [](double) { return 0.0; }, {4.0, 2e-3, 0.0});
  EXPECT_LT(sup_error(dp, one.value), 4e-3);
  EXPECT_NEAR(dp.cutoff(), one.a_star, 4e-3);
}

TEST(Dp, ErrorShrinksWithGrid) {
  const auto one = solve_cooperative(kCrc, 1);
  const double coarse = sup_error(dp_best_response(kCrc, [](double) { return 0.0; }, {4.0, 8e-3, 0.0}), one.value);
  const double fine = sup_error(dp_best_response(kCrc, [](double) { return 0.0; }, {4.0, 4e-3, 0.0}), one.value);
  EXPECT_LT(fine, 0.75 * coarse);
}

TEST(Dp, NoProfitableDeviationFromSymmetric) {
  const auto eq = solve_symmetric(kCrc, 2);
  const auto dp = dp_best_response(kCrc, [&](double a) { return k_dagger(eq, a); }, {5.0, 2e-3, 0.0}, 2.0);
  double gain = -kInf;
  for (std::size_t i = 0; i < dp.a.size(); ++i) gain = std::max(gain, dp.u[i] - eq.value(dp.a[i]));
  EXPECT_LT(gain, 5e-3);
}

TEST(Dp, FreeRiderGainsAgainstCooperativeTeammate) {
  // Against a teammate playing the two-player cooperative cutoff, shirking pays.
  const double cut = cooperative_cutoff(kCrc, 2);
  const auto dp = dp_best_response(kCrc, [&](double a) { return a < cut ? 1.0 : 0.0; }, {5.0, 4e-3, 0.0}, 2.0);
  const auto coop = solve_cooperative(kCrc, 2).value;
  EXPECT_GT(dp.value(0.0), coop(0.0) + 0.05);
}

TEST(Dp, RejectsCoarseGrids) {
  EXPECT_THROW(dp_best_response(kCrc, [](double) { return 0.0; }, {2.0, 1e-2, 0.0}), Error);
  EXPECT_THROW(dp_best_response(kCrc, [](double) { return 0.0; }, {4.0, 1.0, 0.0}), Error);
}
