#pragma once

// Game primitives for exploration on a Brownian landscape W with drift mu and
// volatility sigma per unit of technology, discount rate r, and N players.

#include <cmath>
#include <optional>
#include <sstream>
#include <string_view>

#include "stratex/error.hpp"

namespace stratex {

enum class LandscapeClass { DRC, CRC, IRC };

constexpr std::string_view to_string(LandscapeClass c) {
  switch (c) {
    case LandscapeClass::DRC: return "DRC";
    case LandscapeClass::CRC: return "CRC";
    case LandscapeClass::IRC: return "IRC";
  }
  return "?";
}

/// |theta + 1| below this counts as constant returns to cooperation.
inline constexpr double kCrcTolerance = 1e-9;

inline LandscapeClass classify(double theta) {
  if (std::abs(theta + 1.0) <= kCrcTolerance) return LandscapeClass::CRC;
  return theta < -1.0 ? LandscapeClass::DRC : LandscapeClass::IRC;
}

struct ModelParams {
  double r = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
  double n_players = 1.0;

  /// Parameters captioned as (rho, theta): sigma = sqrt(2), r = 1/rho, mu = theta.
  static ModelParams from_rho_theta(double rho, double theta, double n) {
    return ModelParams{1.0 / rho, theta, std::sqrt(2.0), n};
  }

  double theta() const { return 2.0 * mu / (sigma * sigma); }
  double rho() const { return sigma * sigma / (2.0 * r); }
  double lambda(double n) const { return 1.0 / (n * rho()) - theta(); }
  double lambda() const { return lambda(n_players); }
  double delta(double n) const { return r / n; }
  LandscapeClass landscape() const { return classify(theta()); }

  /// Same primitives with a different team size.
  ModelParams with_n(double n) const { return ModelParams{r, mu, sigma, n}; }
  /// Same landscape with a different discount rate.
  ModelParams with_r(double new_r) const { return ModelParams{new_r, mu, sigma, n_players}; }

  bool operator==(const ModelParams&) const = default;
};

inline void check_primitives(const ModelParams& p) {
  std::ostringstream msg;
  if (!(p.r > 0.0) || !std::isfinite(p.r)) msg << "r must be > 0 (got " << p.r << "); ";
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) msg << "sigma must be > 0 (got " << p.sigma << "); ";
  if (!std::isfinite(p.mu)) msg << "mu must be finite; ";
  if (!(p.n_players >= 1.0) || !std::isfinite(p.n_players))
    msg << "n_players must be >= 1 (got " << p.n_players << "); ";
  if (auto text = msg.str(); !text.empty()) throw Error(ErrorKind::InvalidPrimitive, text.substr(0, text.size() - 2));
}

/// N rho (1 + theta) < 1, equivalently lambda(N) > 1.
inline bool assumption_holds(const ModelParams& p, double team) {
  return team * p.rho() * (1.0 + p.theta()) < 1.0;
}

struct ValidatedParams {
  ModelParams params;
  double team = 1.0;
  double theta = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  LandscapeClass landscape = LandscapeClass::CRC;
};

inline ValidatedParams validate(const ModelParams& p, double team) {
  check_primitives(p);
  if (!(team >= 1.0)) throw Error(ErrorKind::InvalidPrimitive, "team size must be >= 1");
  if (!assumption_holds(p, team)) {
    std::ostringstream msg;
    msg << "N*rho*(1+theta) = " << team * p.rho() * (1.0 + p.theta())
        << " >= 1; cooperative payoff is infinite";
    throw Error(ErrorKind::AssumptionViolated, msg.str());
  }
  return ValidatedParams{p, team, p.theta(), p.rho(), p.lambda(team), p.delta(team), p.landscape()};
}

inline ValidatedParams validate(const ModelParams& p) { return validate(p, p.n_players); }

/// Roots gamma1 < 0 < gamma2 of gamma (gamma - theta) = 1 / (K rho).
struct Roots {
  double gamma1;
  double gamma2;
};

inline Roots quadratic_roots(double rho, double theta, double intensity) {
  const double c = 1.0 / (intensity * rho);
  const double d = std::sqrt(theta * theta + 4.0 * c);
  // Pick the root without cancellation, recover the other from the product -c.
  if (theta >= 0.0) {
    const double g2 = 0.5 * (theta + d);
    return {-c / g2, g2};
  }
  const double g1 = 0.5 * (theta - d);
  return {g1, -c / g1};
}

inline Roots quadratic_roots(const ModelParams& p, double intensity) {
  return quadratic_roots(p.rho(), p.theta(), intensity);
}

struct CriticalLimits {
  std::optional<double> n_hat;  // team size at which Assumption 1 breaks
  std::optional<double> r_hat;  // patience threshold (IRC only)
};

inline CriticalLimits critical_limits(const ModelParams& p) {
  const double theta = p.theta();
  if (classify(theta) != LandscapeClass::IRC) return {};
  CriticalLimits out;
  out.n_hat = 1.0 / (p.rho() * (1.0 + theta));
  const double s2 = p.sigma * p.sigma;
  if (std::abs(theta) < 1e-4) {
    // theta - ln(1+theta) = theta^2 (1/2 - theta/3 + theta^2/4 - ...)
    out.r_hat = s2 / (2.0 * (0.5 - theta / 3.0 + theta * theta / 4.0));
  } else {
    out.r_hat = s2 * theta * theta / (2.0 * (theta - std::log1p(theta)));
  }
  return out;
}

}  // namespace stratex
