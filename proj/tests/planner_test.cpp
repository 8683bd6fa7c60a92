#include <gtest/gtest.h>

#include <cmath>

#include "stratex/planner.hpp"

using namespace stratex;

namespace {
const ModelParams kCrc = ModelParams::from_rho_theta(2, -1, 2);
}

TEST(Planner, CompleteInformationValue) {
  EXPECT_TRUE(std::isinf(complete_info_value(ModelParams::from_rho_theta(1, 0, 1), 1, 0.0)));
  EXPECT_NEAR(complete_info_value(kCrc, 2, 0.0), 5.0, 1e-14);
  EXPECT_NEAR(complete_info_value(kCrc, 2, 60.0), 1.0, 1e-12);
}

TEST(Planner, CooperativeCutoffs) {
  EXPECT_NEAR(cooperative_cutoff(kCrc, 1), 1.5206920, 1e-7);
  EXPECT_NEAR(cooperative_cutoff(kCrc, 2), 2.4929010, 1e-7);
  EXPECT_NEAR(cooperative_cutoff_by_pasting(kCrc, 1), cooperative_cutoff(kCrc, 1), 1e-10);
  EXPECT_NEAR(cooperative_cutoff_by_pasting(kCrc, 2), cooperative_cutoff(kCrc, 2), 1e-10);
}

TEST(Planner, CooperativeBoundaryConditions) {
  for (double theta : {-2.0, -1.0, -0.3, 0.0}) {
    for (double n : {1.0, 2.0, 3.0}) {
      const auto p = ModelParams::from_rho_theta(0.3, theta, n);
      const auto sol = solve_cooperative(p, n);
      const auto top = sol.value.eval_left(sol.a_star);
      EXPECT_NEAR(top.u, 1.0, 1e-12);
      EXPECT_NEAR(top.du, 0.0, 1e-12);
      const auto v0 = sol.value.eval(0.0);
      EXPECT_NEAR(v0.u + v0.du, 0.0, 1e-10 * v0.u);
      for (double a = 0.05; a < sol.a_star; a += 0.1)
        EXPECT_NEAR(beta(sol.value, a), sol.value(a) / n, 1e-8 * sol.value(a));
      EXPECT_EQ(sol.value(sol.a_star + 0.1), 1.0);
      EXPECT_NEAR(cooperative_value(p, n, 0.3), sol.value(0.3), 1e-12 * sol.value(0.3));
    }
  }
}

TEST(Planner, CooperativeRejectsInfinitePayoff) {
  EXPECT_THROW(solve_cooperative(ModelParams::from_rho_theta(1, 0.5, 1), 1), Error);
}

TEST(Planner, ValueBelowCompleteInformation) {
  for (double theta : {-2.0, -1.0, -0.2}) {
    const auto p = ModelParams::from_rho_theta(0.5, theta, 2);
    const auto sol = solve_cooperative(p, 2);
    for (int i = 0; i <= 200; ++i) {
      const double a = sol.a_star * i / 200.0;
      EXPECT_LT(sol.value(a), complete_info_value(p, 2, a));
    }
  }
}

TEST(Planner, SandwichInTeamSize) {
  const auto p = ModelParams::from_rho_theta(2, -1, 1);
  const auto one = solve_cooperative(p, 1);
  for (double n : {2.0, 3.0, 5.0}) {
    const auto big = solve_cooperative(p, n);
    for (double a = 0.0; a < 4.0; a += 0.05) {
      EXPECT_GE(one.value(a), 1.0);
      EXPECT_LE(one.value(a), big.value(a) + 1e-14);
    }
  }
}

TEST(Planner, DrcGapToCompleteInformationShrinks) {
  // The gap can rise for small teams; it falls once N rho is large.
  const auto p = ModelParams::from_rho_theta(4, -1.5, 1);
  double prev = kInf;
  for (double n : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double gap = complete_info_value(p, n, 0.0) - solve_cooperative(p, n).value(0.0);
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Planner, LongRunDistribution) {
  const auto zero = longrun_standard_distribution(-1.0, 0.0, 0.0, 3.0);
  EXPECT_EQ(zero.mean, 0.0);
  EXPECT_EQ(zero.point_mass, 1.0);
  EXPECT_EQ(zero.cdf(3.0), 1.0);

  const auto flat = longrun_standard_distribution(0.0, 2.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(flat.mean, 2.0);
  EXPECT_EQ(flat.point_mass, 0.0);
  EXPECT_NEAR(flat.tail_cdf(2.0), 1.0 - std::exp(-1.0), 1e-15);

  const auto crc = longrun_standard_distribution(-1.0, 2.0, 0.5, 0.0);
  EXPECT_NEAR(crc.mean, 1.0 - std::exp(-2.0), 1e-15);
  // Gambler's ruin: the gap drifts up at rate 1, so 0 is reached before 2 w.p. (e^-0.5 - e^-2)/(1 - e^-2).
  EXPECT_NEAR(crc.point_mass, 1.0 - (std::exp(-0.5) - std::exp(-2.0)) / (1.0 - std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(crc.cdf(0.0), crc.point_mass, 1e-15);
  EXPECT_EQ(longrun_standard_distribution(-1.0, 2.0, 2.5, 0.0).point_mass, 1.0);
  EXPECT_NEAR(longrun_standard_distribution(0.0, 2.0, 0.5, 0.0).point_mass, 0.25, 1e-15);
}

TEST(Planner, SweepsAreMonotone) {
  const auto rows = coop_sweep(sweep_over_n(kCrc, {1, 2, 3, 4, 5, 6, 7, 8}));
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].a_star, rows[i - 1].a_star);
    EXPECT_GT(rows[i].u_star_0, rows[i - 1].u_star_0);
    EXPECT_EQ(rows[i].n_players, static_cast<double>(i + 1));
  }
  const auto by_r = coop_sweep(sweep_over_r(kCrc, {1.0, 0.8, 0.6, 0.4, 0.2}));
  for (std::size_t i = 1; i < by_r.size(); ++i) EXPECT_GT(by_r[i].a_star, by_r[i - 1].a_star);
}

TEST(Planner, SweepCarriesSentinels) {
  const auto rows = coop_sweep(sweep_over_n(ModelParams::from_rho_theta(1, 0.5, 1), {1, 2, 3}));
  for (const auto& row : rows) {
    EXPECT_TRUE(std::isinf(row.a_star));
    EXPECT_TRUE(std::isinf(row.u_star_0));
    EXPECT_TRUE(std::isinf(row.u_hat_0));
  }
}
