#include <gtest/gtest.h>

#include <cmath>

#include "stratex/model.hpp"

using namespace stratex;

TEST(Model, DerivedConstants) {
  const ModelParams p{0.5, -1.0, std::sqrt(2.0), 2};
  EXPECT_DOUBLE_EQ(p.theta(), -1.0);
  EXPECT_DOUBLE_EQ(p.rho(), 2.0);
  EXPECT_DOUBLE_EQ(p.lambda(), 1.25);
  EXPECT_DOUBLE_EQ(p.delta(2), 0.25);
  EXPECT_EQ(p.landscape(), LandscapeClass::CRC);
}

TEST(Model, RhoThetaInputKeepsBothComposites) {
  for (double rho : {0.5, 2.0, 3.7}) {
    for (double theta : {-1.5, -1.0, -0.09, 0.0, 0.4}) {
      const auto p = ModelParams::from_rho_theta(rho, theta, 3);
      EXPECT_NEAR(p.rho(), rho, 1e-14 * rho);
      EXPECT_NEAR(p.theta(), theta, 1e-14);
    }
  }
}

TEST(Model, ValidateCrcExample) {
  const auto v = validate(ModelParams::from_rho_theta(2, -1, 2));
  EXPECT_EQ(v.landscape, LandscapeClass::CRC);
  EXPECT_DOUBLE_EQ(v.lambda, 1.25);
}

TEST(Model, AssumptionBoundaryIsRejected) {
  try {
    validate(ModelParams::from_rho_theta(1, 0, 1));
    FAIL() << "expected AssumptionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AssumptionViolated);
  }
}

TEST(Model, DrcAlwaysValid) {
  for (double rho : {0.1, 1.0, 10.0}) {
    for (double n : {1.0, 5.0, 1000.0}) {
      const auto v = validate(ModelParams::from_rho_theta(rho, -1.5, n));
      EXPECT_EQ(v.landscape, LandscapeClass::DRC);
    }
  }
}

TEST(Model, InvalidPrimitives) {
  EXPECT_THROW(check_primitives(ModelParams{0.0, 0.0, 1.0, 1}), Error);
  EXPECT_THROW(check_primitives(ModelParams{1.0, 0.0, -1.0, 1}), Error);
  EXPECT_THROW(check_primitives(ModelParams{1.0, 0.0, 1.0, 0}), Error);
  try {
    validate(ModelParams{1.0, 0.0, 0.0, 1});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidPrimitive);
  }
}

TEST(Model, QuadraticRootExamples) {
  const auto a = quadratic_roots(1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(a.gamma1, -1.0);
  EXPECT_DOUBLE_EQ(a.gamma2, 1.0);
  const auto b = quadratic_roots(2.0, -1.0, 2.0);
  EXPECT_NEAR(b.gamma1, (-1.0 - std::sqrt(2.0)) / 2, 1e-15);
  EXPECT_NEAR(b.gamma2, (-1.0 + std::sqrt(2.0)) / 2, 1e-15);
  const auto c = quadratic_roots(2.0, -1.0, 1.0);
  EXPECT_NEAR(c.gamma1, (-1.0 - std::sqrt(3.0)) / 2, 1e-15);
  EXPECT_NEAR(c.gamma2, (-1.0 + std::sqrt(3.0)) / 2, 1e-15);
}

TEST(Model, QuadraticRootVieta) {
  for (double theta : {-3.0, -1.0, -0.09, 0.0, 0.3, 2.0}) {
    for (double rho : {0.5, 1.0, 4.0}) {
      for (double k = 1; k <= 8; ++k) {
        const auto g = quadratic_roots(rho, theta, k);
        EXPECT_LT(g.gamma1, 0.0);
        EXPECT_GT(g.gamma2, 0.0);
        EXPECT_NEAR(g.gamma1 + g.gamma2, theta, 1e-12 * std::max(1.0, std::abs(theta)));
        const double c = 1.0 / (k * rho);
        EXPECT_NEAR(g.gamma1 * g.gamma2, -c, 1e-12 * c);
      }
    }
  }
}

TEST(Model, ScaleConsistentClassification) {
  for (double mu : {-2.0, -1.0, -0.5, 0.5}) {
    const ModelParams p{1.0, mu, 1.0, 1};
    const ModelParams q{1.0, 3.0 * mu, std::sqrt(3.0), 1};
    EXPECT_NEAR(p.theta(), q.theta(), 1e-14);
    EXPECT_EQ(p.landscape(), q.landscape());
  }
}

TEST(Model, AssumptionMonotoneInTeamSize) {
  // Only an IRC landscape can lose validity as the team grows.
  for (double theta : {-2.0, -1.0, -0.5, 0.2}) {
    const auto p = ModelParams::from_rho_theta(0.7, theta, 1);
    for (double n = 1; n < 20; ++n) {
      if (assumption_holds(p, n) && !assumption_holds(p, n + 1)) {
        EXPECT_GT(theta, -1.0);
      }
    }
  }
}

TEST(Model, CriticalLimits) {
  const auto crc = critical_limits(ModelParams::from_rho_theta(2, -1, 1));
  EXPECT_FALSE(crc.n_hat.has_value());
  EXPECT_FALSE(crc.r_hat.has_value());

  const auto irc = critical_limits(ModelParams::from_rho_theta(1, 0.5, 1));
  ASSERT_TRUE(irc.n_hat.has_value());
  EXPECT_NEAR(*irc.n_hat, 1.0 / 1.5, 1e-15);
  EXPECT_THROW(validate(ModelParams::from_rho_theta(1, 0.5, 1)), Error);

  const auto fig = critical_limits(ModelParams{1.0, -0.09, std::sqrt(2.0), 1});
  ASSERT_TRUE(fig.r_hat.has_value());
  EXPECT_NEAR(*fig.r_hat, 1.8790540, 1e-6);

  // Continuous through theta = 0, where r_hat = sigma^2.
  const auto zero = critical_limits(ModelParams{1.0, 0.0, 1.5, 1});
  EXPECT_NEAR(*zero.r_hat, 2.25, 1e-14);
  const auto near = critical_limits(ModelParams{1.0, 1.01e-4 * 1.125, 1.5, 1});
  EXPECT_NEAR(*near.r_hat, 2.25, 1e-3);
}
