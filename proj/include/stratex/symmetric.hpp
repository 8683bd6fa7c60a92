#pragma once

// The symmetric Markov perfect equilibrium: thresholds a_tilde (stopping) and
// a_dagger (full intensity), common strategy k and common payoff U.

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/parallel.hpp"
#include "stratex/planner.hpp"
#include "stratex/strategy.hpp"

namespace stratex {

struct SymmetricEquilibrium {
  ModelParams params;
  double n = 1.0;
  double a_tilde = 0.0;
  double a_dagger = 0.0;
  bool binding = false;
  bool assumption_violated = false;
  PiecewiseValue value;
  Strategy strategy;

  StrategyProfile profile() const {
    const auto players = static_cast<std::size_t>(std::llround(n));
    return StrategyProfile(std::vector<Strategy>(std::max<std::size_t>(players, 1), strategy));
  }
};

/// k(a): 1 below a_dagger, the phi-integral formula on [a_dagger, a_tilde), 0 beyond.
inline double k_dagger(const SymmetricEquilibrium& eq, double a) {
  if (a >= eq.a_tilde) return 0.0;
  if (a < eq.a_dagger) return 1.0;
  if (eq.n <= 1.0) return 1.0;
  return std::min(1.0, phi_theta_integral(eq.params.theta(), eq.a_tilde - a) / ((eq.n - 1.0) * eq.params.rho()));
}

namespace detail {

/// Normal-reflection residual of the interior branch as a function of z = a_tilde.
inline double interior_reflection(double rho, double theta, double z) {
  return 1.0 + (phi_theta_integral(theta, z) - phi_theta(theta, z)) / rho;
}

/// Root of interior_reflection, if any. For theta > -1 the residual is minimal at
/// z0 = ln(1 + theta)/theta and a root exists iff the minimum is <= 0.
inline std::optional<double> nonbinding_threshold(double rho, double theta) {
  auto g = [&](double z) { return interior_reflection(rho, theta, z); };
  if (theta > -1.0) {
    const double z0 = std::abs(theta) < 1e-12 ? 1.0 : std::log1p(theta) / theta;
    if (g(z0) > 0.0) return std::nullopt;
    return shoot_scalar(g, 0.0, z0, 1e-14);
  }
  return shoot_scalar(g, 0.0, 1.0, 1e-14, /*expand=*/true);
}

}  // namespace detail

inline SymmetricEquilibrium solve_symmetric(const ModelParams& p, double n) {
  check_primitives(p);
  if (!(n >= 1.0)) throw Error(ErrorKind::InvalidPrimitive, "team size must be >= 1");
  const bool assumption = assumption_holds(p, n);
  const double rho = p.rho(), theta = p.theta();

  SymmetricEquilibrium eq;
  eq.params = p;
  eq.n = n;
  eq.assumption_violated = !assumption;

  if (n <= 1.0) {
    const auto coop = solve_cooperative(p, 1.0);
    eq.a_tilde = eq.a_dagger = coop.a_star;
    eq.binding = true;
    eq.value = coop.value;
    eq.strategy = Strategy::cutoff(coop.a_star);
    return eq;
  }

  const auto z = detail::nonbinding_threshold(rho, theta);
  if (z && 1.0 + phi_theta_integral(theta, *z) / rho <= n + 1e-10) {
    eq.a_tilde = *z;
    eq.a_dagger = 0.0;
    eq.binding = false;
  } else {
    if (!assumption) validate(p, n);  // throws AssumptionViolated
    // Width of the interior region: U falls from n to 1 over d_n.
    const double d_n = shoot_scalar([&](double d) { return phi_theta_integral(theta, d) - (n - 1.0) * rho; },
                                    0.0, 1.0, 1e-14, /*expand=*/true);
    const double slope = -phi_theta(theta, d_n) / rho;
    auto residual = [&](double a_dag) {
      const ValuePoint v = ExpFamily::through(rho, theta, n, 0.0, a_dag, n, slope).eval(0.0);
      return v.u + v.du;
    };
    eq.a_dagger = shoot_scalar(residual, 0.0, 1.0, 1e-14, /*expand=*/true);
    eq.a_tilde = eq.a_dagger + d_n;
    eq.binding = eq.a_dagger > 0.0;
  }

  const InteriorFamily interior = InteriorFamily::through(rho, theta, eq.a_tilde, 1.0, 0.0);
  std::vector<Segment> segs;
  if (eq.binding) {
    const ValuePoint at = interior.eval(eq.a_dagger);
    segs.push_back(Segment{0.0, eq.a_dagger, ExpFamily::through(rho, theta, n, 0.0, eq.a_dagger, at.u, at.du)});
  }
  segs.push_back(Segment{eq.a_dagger, eq.a_tilde, interior});
  eq.value = PiecewiseValue(rho, theta, std::move(segs));

  std::vector<StrategyPiece> pieces;
  if (eq.binding) pieces.push_back(StrategyPiece{0.0, eq.a_dagger, ConstantAction{1.0}});
  pieces.push_back(StrategyPiece{eq.a_dagger, eq.a_tilde, PhiIntegral{eq.a_tilde, theta, 1.0 / ((n - 1.0) * rho)}});
  eq.strategy = Strategy(std::move(pieces));

  // Post-hoc boundary conditions.
  const ValuePoint v0 = eq.value.eval(0.0);
  const ValuePoint vt = eq.value.eval_left(eq.a_tilde);
  const double scale = std::max(1.0, v0.u);
  if (std::abs(v0.u + v0.du) > 1e-8 * scale || std::abs(vt.u - 1.0) > 1e-10 || std::abs(vt.du) > 1e-10)
    throw Error(ErrorKind::ConvergenceFailure, "symmetric equilibrium fails its boundary conditions");
  if (eq.binding) {
    const ValuePoint l = eq.value.eval_left(eq.a_dagger), r = eq.value.eval(eq.a_dagger);
    if (std::abs(l.u - r.u) > 1e-8 * scale || std::abs(l.du - r.du) > 1e-8 * scale || std::abs(r.u - n) > 1e-8 * n)
      throw Error(ErrorKind::ConvergenceFailure, "symmetric equilibrium is not C1 at the full-intensity threshold");
  }
  return eq;
}

struct SymmetricRow {
  double n_players = 1.0;
  double r = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double a_tilde = kInf;
  double a_dagger = kInf;
  bool binding = false;
  double u0 = kInf;
  double k0 = 0.0;
  bool assumption_violated = false;
  bool solved = false;
};

inline SymmetricRow symmetric_row(const ModelParams& p) {
  SymmetricRow row;
  row.n_players = p.n_players;
  row.r = p.r;
  row.rho = p.rho();
  row.theta = p.theta();
  row.assumption_violated = !assumption_holds(p, p.n_players);
  try {
    const auto eq = solve_symmetric(p, p.n_players);
    row.a_tilde = eq.a_tilde;
    row.a_dagger = eq.a_dagger;
    row.binding = eq.binding;
    row.u0 = eq.value(0.0);
    row.k0 = k_dagger(eq, 0.0);
    row.solved = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AssumptionViolated) throw;
  }
  return row;
}

/// Rows in input order; cells refused beyond the assumption carry +inf.
inline std::vector<SymmetricRow> symmetric_sweep(const std::vector<ModelParams>& cells) {
  for (const auto& c : cells) check_primitives(c);
  std::vector<SymmetricRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) { rows[i] = symmetric_row(cells[i]); });
  return rows;
}

}  // namespace stratex
