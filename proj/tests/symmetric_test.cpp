#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stratex/symmetric.hpp"

using namespace stratex;

namespace {
const ModelParams kCrc = ModelParams::from_rho_theta(2, -1, 2);

double hjb_residual(const SymmetricEquilibrium& eq, double a) {
  const auto v = eq.value.eval(a);
  const double b = beta_of(v, eq.params.rho(), eq.params.theta());
  return v.u - (1.0 + (eq.n - 1.0) * k_dagger(eq, a) * b + std::max(b - 1.0, 0.0));
}
}  // namespace

TEST(Symmetric, FourPlayersNonBinding) {
  const auto eq = solve_symmetric(kCrc, 4);
  EXPECT_FALSE(eq.binding);
  EXPECT_EQ(eq.a_dagger, 0.0);
  EXPECT_NEAR(eq.a_tilde, 2.0, 1e-12);
  EXPECT_NEAR(eq.value(0.0), (std::exp(2.0) - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(k_dagger(eq, 0.0), (std::exp(2.0) - 3.0) / 6.0, 1e-12);
  EXPECT_NEAR(k_dagger(eq, 0.0), (eq.value(0.0) - 1.0) / 3.0, 1e-12);
}

TEST(Symmetric, TwoPlayersBinding) {
  const auto eq = solve_symmetric(kCrc, 2);
  EXPECT_TRUE(eq.binding);
  EXPECT_NEAR(eq.a_dagger, 0.40755861349691955, 1e-9);
  EXPECT_NEAR(eq.a_tilde, 1.9128001092898029, 1e-9);
  EXPECT_NEAR(eq.value(0.0), 2.9358811181358740, 1e-9);
  EXPECT_EQ(k_dagger(eq, 0.1), 1.0);
  EXPECT_NEAR(k_dagger(eq, eq.a_dagger), 1.0, 1e-10);
  EXPECT_EQ(k_dagger(eq, eq.a_tilde), 0.0);
  for (double a = 0.01; a < eq.a_dagger; a += 0.05) {
    EXPECT_GT(eq.value(a), 2.0);
    EXPECT_NEAR(beta(eq.value, a), eq.value(a) / 2.0, 1e-8 * eq.value(a));
  }
}

TEST(Symmetric, SinglePlayerIsCooperative) {
  const auto eq = solve_symmetric(kCrc, 1);
  EXPECT_NEAR(eq.a_tilde, cooperative_cutoff(kCrc, 1), 1e-12);
}

TEST(Symmetric, InvariantsOnRandomDraws) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(-2.0, 0.5), rh(0.2, 3.0);
  int done = 0;
  while (done < 40) {
    const double theta = th(rng), rho = rh(rng), n = 2 + static_cast<double>(rng() % 5);
    const auto p = ModelParams::from_rho_theta(rho, theta, n);
    if (!assumption_holds(p, n)) continue;
    ++done;
    const auto eq = solve_symmetric(p, n);
    const double lo = cooperative_cutoff(p, 1), hi = cooperative_cutoff(p, n);
    EXPECT_GT(eq.a_tilde, lo);
    EXPECT_LT(eq.a_tilde, hi);
    const auto one = solve_cooperative(p, 1), team = solve_cooperative(p, n);
    double prev_k = 1.0;
    for (int i = 1; i < 500; ++i) {
      const double a = eq.a_tilde * i / 500.0;
      if (eq.value.is_breakpoint(a)) continue;
      EXPECT_NEAR(hjb_residual(eq, a), 0.0, 1e-6 * std::max(1.0, eq.value(a)));
      const double k = k_dagger(eq, a);
      EXPECT_LE(k, prev_k + 1e-15);
      prev_k = k;
      if (a > eq.a_dagger) {
        EXPECT_GT(eq.value(a), 1.0);
        EXPECT_LT(eq.value(a), n);
        EXPECT_NEAR(k, (eq.value(a) - 1.0) / (n - 1.0), 1e-8);
      }
      EXPECT_LE(one.value(a), eq.value(a) + 1e-12);
      EXPECT_LE(eq.value(a), team.value(a) + 1e-12);
    }
  }
}

TEST(Symmetric, ConstantOnceNonBinding) {
  const auto rows = symmetric_sweep(sweep_over_n(kCrc, {2, 3, 4, 5, 6, 7, 8}));
  bool seen = false;
  double at = 0.0, u0 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      EXPECT_GE(rows[i].a_tilde, rows[i - 1].a_tilde - 1e-12);
    }
    if (seen) {
      EXPECT_FALSE(rows[i].binding);
      EXPECT_NEAR(rows[i].a_tilde, at, 1e-12);
      EXPECT_NEAR(rows[i].u0, u0, 1e-12);
    } else if (!rows[i].binding) {
      seen = true;
      at = rows[i].a_tilde;
      u0 = rows[i].u0;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Symmetric, DecreasingInDiscountRate) {
  const auto p = ModelParams::from_rho_theta(2, -1, 2);
  const std::vector<double> rs{0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<SymmetricEquilibrium> eqs;
  for (double r : rs) eqs.push_back(solve_symmetric(p.with_r(r), 2));
  for (std::size_t i = 1; i < eqs.size(); ++i) {
    EXPECT_LT(eqs[i].a_tilde, eqs[i - 1].a_tilde);
    for (double a = 0.0; a < 4.0; a += 0.1) EXPECT_LE(eqs[i].value(a), eqs[i - 1].value(a) + 1e-12);
  }
}

TEST(Symmetric, AsymptoticDichotomy) {
  const double theta = -0.09, sigma = std::sqrt(2.0);
  const auto base = ModelParams{1.0, theta * sigma * sigma / 2.0, sigma, 1};
  const double r_hat = *critical_limits(base).r_hat;

  const auto patient = base.with_r(0.8 * r_hat);
  const double n_hat = *critical_limits(patient).n_hat;
  for (double n = 1.05; n <= 0.95 * n_hat; n += 0.05) EXPECT_TRUE(solve_symmetric(patient, n).binding) << n;

  const auto impatient = base.with_r(1.6 * r_hat);
  const auto rows = symmetric_sweep(sweep_over_n(impatient, {2, 3, 4, 5, 6, 8, 12, 20}));
  EXPECT_FALSE(rows.back().binding);
  EXPECT_TRUE(rows.back().assumption_violated);
  EXPECT_NEAR(rows.back().a_tilde, rows[rows.size() - 2].a_tilde, 1e-12);
}

TEST(Symmetric, BindingRefusedBeyondAssumption) {
  const auto p = ModelParams{1.0, -0.09, std::sqrt(2.0), 1};
  EXPECT_THROW(solve_symmetric(p, 1.05 / (p.rho() * 0.91)), Error);
}
