#pragma once

// Complete-information benchmark and the N-agent cooperative (planner) solution.

#include <cmath>
#include <optional>
#include <vector>

#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/parallel.hpp"
#include "stratex/strategy.hpp"

namespace stratex {

/// Normalized ex-ante value under complete information; +inf when lambda <= 1.
inline double complete_info_value(const ModelParams& p, double n, double a) {
  const double lambda = p.lambda(n);
  if (!(lambda > 1.0)) return kInf;
  return 1.0 + std::exp(-lambda * a) / (lambda - 1.0);
}

struct CooperativeSolution {
  ModelParams params;
  double n = 1.0;
  double a_star = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  PiecewiseValue value;

  Strategy strategy() const { return Strategy::cutoff(a_star); }
};

/// a* = (ln(1 + 1/gamma2) - ln(1 + 1/gamma1)) / (gamma2 - gamma1).
inline double cooperative_cutoff(const ModelParams& p, double n) {
  const Roots g = quadratic_roots(p, n);
  return (std::log1p(1.0 / g.gamma2) - std::log1p(1.0 / g.gamma1)) / (g.gamma2 - g.gamma1);
}

namespace detail {

inline ExpFamily full_intensity_branch(const ModelParams& p, double n, double cutoff) {
  return ExpFamily::through(p.rho(), p.theta(), n, 0.0, cutoff, 1.0, 0.0);
}

/// u(0) + u'(0) for the full-intensity branch pasted smoothly at `cutoff`.
inline double coop_reflection_residual(const ModelParams& p, double n, double cutoff) {
  const ValuePoint v = full_intensity_branch(p, n, cutoff).eval(0.0);
  return v.u + v.du;
}

}  // namespace detail

/// a* from smooth pasting plus normal reflection, solved by root finding only.
inline double cooperative_cutoff_by_pasting(const ModelParams& p, double n, double tol = 1e-13) {
  validate(p, n);
  return shoot_scalar([&](double x) { return detail::coop_reflection_residual(p, n, x); }, 0.0, 1.0, tol,
                      /*expand=*/true);
}

inline CooperativeSolution solve_cooperative(const ModelParams& p, double n) {
  validate(p, n);
  const Roots g = quadratic_roots(p, n);
  const double a_star = cooperative_cutoff(p, n);

  // One Newton step on the reflection residual as a check on the closed form.
  const double h = 1e-6 * std::max(1.0, a_star);
  const double r0 = detail::coop_reflection_residual(p, n, a_star);
  const double slope = (detail::coop_reflection_residual(p, n, a_star + h) -
                        detail::coop_reflection_residual(p, n, a_star - h)) /
                       (2.0 * h);
  const double refined = a_star - r0 / slope;
  if (!(std::abs(refined - a_star) <= 1e-8))
    throw Error(ErrorKind::ConvergenceFailure, "closed-form cooperative cutoff fails the reflection check");

  CooperativeSolution sol;
  sol.params = p;
  sol.n = n;
  sol.a_star = a_star;
  sol.gamma1 = g.gamma1;
  sol.gamma2 = g.gamma2;
  sol.value = PiecewiseValue(p.rho(), p.theta(),
                             {Segment{0.0, a_star, detail::full_intensity_branch(p, n, a_star)}});
  return sol;
}

/// U*(a) from the closed form, +inf when Assumption 1 fails.
inline double cooperative_value(const ModelParams& p, double n, double a) {
  if (!assumption_holds(p, n)) return kInf;
  const Roots g = quadratic_roots(p, n);
  const double a_star = cooperative_cutoff(p, n);
  if (a >= a_star) return 1.0;
  return (g.gamma2 * std::exp(-g.gamma1 * (a_star - a)) - g.gamma1 * std::exp(-g.gamma2 * (a_star - a))) /
         (g.gamma2 - g.gamma1);
}

/// Law of the long-run technological standard s0 + X. Started from a gap a0 < a_bar the gap
/// reaches 0 before a_bar with probability 1 - E(a0)/E(a_bar), E(x) = (e^{theta x} - 1)/theta,
/// and from there X ~ Exp(E(a_bar)). At a0 = 0 this is max{s0, s0 + M}, M ~ Exp(E(a_bar)).
struct LongRunDistribution {
  double s0 = 0.0;
  double a0 = 0.0;
  double mean = 0.0;        // mean of the excess once the gap has hit 0
  double point_mass = 1.0;  // P(standard = s0)

  double cdf(double s) const {
    if (s < s0) return 0.0;
    if (mean <= 0.0) return 1.0;
    return 1.0 - (1.0 - point_mass) * std::exp(-(s - s0) / mean);
  }
  /// CDF of (standard - s0) conditional on standard > s0.
  double tail_cdf(double excess) const {
    if (excess <= 0.0) return 0.0;
    return mean <= 0.0 ? 1.0 : -std::expm1(-excess / mean);
  }
};

inline LongRunDistribution longrun_standard_distribution(double theta, double a_bar, double a0, double s0) {
  LongRunDistribution d;
  d.s0 = s0;
  d.a0 = a0;
  d.mean = expm1_ratio(theta, a_bar);
  d.point_mass = d.mean <= 0.0 || a0 >= a_bar ? 1.0 : expm1_ratio(theta, a0) / d.mean;
  return d;
}

struct CoopRow {
  double n_players = 1.0;
  double r = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double a_star = kInf;
  double u_star_0 = kInf;
  double u_hat_0 = kInf;
  LandscapeClass landscape = LandscapeClass::CRC;
};

inline CoopRow coop_row(const ModelParams& p) {
  CoopRow row;
  row.n_players = p.n_players;
  row.r = p.r;
  row.rho = p.rho();
  row.theta = p.theta();
  row.landscape = p.landscape();
  row.u_hat_0 = complete_info_value(p, p.n_players, 0.0);
  if (assumption_holds(p, p.n_players)) {
    const auto sol = solve_cooperative(p, p.n_players);
    row.a_star = sol.a_star;
    row.u_star_0 = sol.value(0.0);
  }
  return row;
}

/// One row per parameter cell, in input order; infeasible cells carry +inf.
inline std::vector<CoopRow> coop_sweep(const std::vector<ModelParams>& cells) {
  std::vector<CoopRow> rows(cells.size());
  for (const auto& c : cells) check_primitives(c);
  parallel_for(cells.size(), [&](std::size_t i) { rows[i] = coop_row(cells[i]); });
  return rows;
}

inline std::vector<ModelParams> sweep_over_n(const ModelParams& base, const std::vector<double>& ns) {
  std::vector<ModelParams> out;
  for (double n : ns) out.push_back(base.with_n(n));
  return out;
}

inline std::vector<ModelParams> sweep_over_r(const ModelParams& base, const std::vector<double>& rs) {
  std::vector<ModelParams> out;
  for (double r : rs) out.push_back(base.with_r(r));
  return out;
}

}  // namespace stratex
