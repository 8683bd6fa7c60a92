#pragma once

// Equilibrium checks on constructed payoffs, payoffs of arbitrary profiles, and a
// discrete dynamic-programming best-response oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "stratex/asymmetric.hpp"
#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/planner.hpp"
#include "stratex/strategy.hpp"
#include "stratex/symmetric.hpp"

namespace stratex {

struct CheckEntry {
  double measured = 0.0;
  double tolerance = 0.0;
  int grid = 0;
  bool passed = true;
};

struct BestResponseViolation {
  double a = 0.0;
  int player = 0;
  double beta = 0.0;
  double action = 0.0;
};

struct VerificationReport {
  CheckEntry normal_reflection;
  CheckEntry smooth_pasting;
  CheckEntry c1_continuity;
  CheckEntry hjb_max_residual;
  CheckEntry best_response;
  std::vector<BestResponseViolation> best_response_violations;
  CheckEntry payoff_bounds;
  CheckEntry encouragement;  // measured: stopping threshold minus the single-agent cutoff
  bool everyone_explores = true;
  bool no_cutoff = true;

  bool conditions_hold() const {
    return normal_reflection.passed && smooth_pasting.passed && c1_continuity.passed && hjb_max_residual.passed &&
           best_response.passed;
  }
  bool passed() const {
    return conditions_hold() && payoff_bounds.passed && encouragement.passed && everyone_explores && no_cutoff;
  }
};

namespace detail {

inline CheckEntry entry(double measured, double tol, int grid) { return CheckEntry{measured, tol, grid, measured <= tol}; }

inline bool is_cutoff_strategy(const Strategy& s, double top, int grid) {
  bool stopped = false;
  for (int i = 0; i <= grid; ++i) {
    const double k = s(top * i / grid);
    if (k != 0.0 && k != 1.0) return false;
    if (k == 0.0) stopped = true;
    if (k == 1.0 && stopped) return false;
  }
  return true;
}

}  // namespace detail

/// Checks the equilibrium conditions for a profile with its claimed payoff functions.
inline VerificationReport check_equilibrium(const ModelParams& p, const StrategyProfile& profile,
                                            const std::vector<PiecewiseValue>& payoffs, int grid = 1000,
                                            double tol = 1e-5, std::size_t max_violations = 1000) {
  const double rho = p.rho(), theta = p.theta();
  const double n = static_cast<double>(profile.size());
  VerificationReport rep;

  double top = profile.stopping_threshold();
  for (const auto& u : payoffs) top = std::max(top, std::isfinite(u.stopping_threshold()) ? u.stopping_threshold() : 0.0);
  if (!std::isfinite(top) || top <= 0.0) top = 1.0;

  // Sample points: a uniform grid beyond the stopping threshold plus both sides of every breakpoint.
  std::vector<double> pts;
  const double hi = 1.2 * top;
  for (int i = 1; i <= grid; ++i) pts.push_back(hi * i / grid);
  std::vector<double> bps = profile.breakpoints();
  for (const auto& u : payoffs) {
    const auto b = u.breakpoints();
    bps.insert(bps.end(), b.begin(), b.end());
  }
  for (double b : bps) {
    const double eps = 1e-7 * std::max(1.0, b);
    if (b - eps > 0.0) pts.push_back(b - eps);
    pts.push_back(b + eps);
  }
  std::sort(pts.begin(), pts.end());

  double reflect = 0.0, paste = 0.0, c1 = 0.0;
  for (const auto& u : payoffs) {
    const auto v0 = u.eval(0.0);
    reflect = std::max(reflect, std::abs(v0.u + v0.du) / std::max(1.0, v0.u));
    const double s = u.stopping_threshold();
    if (std::isfinite(s) && s > 0.0) {
      const auto l = u.eval_left(s);
      paste = std::max({paste, std::abs(l.u - 1.0), std::abs(l.du)});
    }
    for (double b : u.breakpoints()) {
      const auto l = u.eval_left(b), r = u.eval(b);
      c1 = std::max({c1, std::abs(l.u - r.u), std::abs(l.du - r.du)});
    }
  }
  rep.normal_reflection = detail::entry(reflect, tol, 1);
  rep.smooth_pasting = detail::entry(paste, tol, 1);
  rep.c1_continuity = detail::entry(c1, tol, static_cast<int>(bps.size()));

  double hjb = 0.0;
  auto record = [&](double a, int m, double b, double k) {
    if (rep.best_response_violations.size() < max_violations) rep.best_response_violations.push_back({a, m, b, k});
  };
  std::size_t violations = 0;
  for (std::size_t m = 0; m < payoffs.size(); ++m) {
    const auto& u = payoffs[m];
    for (double a : pts) {
      if (u.is_breakpoint(a)) continue;
      const auto v = u.eval(a);
      const double b = beta_of(v, rho, theta);
      const double k = profile[m](a);
      const double others = profile.others(a, m);
      hjb = std::max(hjb, std::abs(v.u - (1.0 + others * b + std::max(b - 1.0, 0.0))) / std::max(1.0, v.u));
      if ((k > tol && b < 1.0 - tol) || (k < 1.0 - tol && b > 1.0 + tol)) {
        ++violations;
        record(a, static_cast<int>(m), b, k);
      }
    }
    // A convex kink has an infinite benefit-cost ratio: exploring is strictly better there.
    for (double b : u.breakpoints()) {
      const double jump = u.eval(b).du - u.eval_left(b).du;
      const double k = profile[m](b);
      if (jump > tol && k < 1.0 - tol) {
        ++violations;
        record(b, static_cast<int>(m), kInf, k);
      }
    }
  }
  rep.hjb_max_residual = detail::entry(hjb, tol, static_cast<int>(pts.size()));
  rep.best_response = detail::entry(static_cast<double>(violations), 0.0, static_cast<int>(pts.size()));

  // Individual payoffs are bounded below by the single-agent value and on average by the planner's.
  double bound = 0.0;
  if (assumption_holds(p, n)) {
    const auto one = solve_cooperative(p, 1.0), team = solve_cooperative(p, n);
    for (double a : pts) {
      double sum = 0.0;
      for (const auto& u : payoffs) {
        bound = std::max(bound, one.value(a) - u(a));
        sum += u(a);
      }
      bound = std::max(bound, sum / payoffs.size() - team.value(a));
    }
  }
  rep.payoff_bounds = detail::entry(bound, tol, static_cast<int>(pts.size()));

  const double margin = profile.stopping_threshold() - cooperative_cutoff(p, 1.0);
  rep.encouragement = CheckEntry{margin, 0.0, 1, margin > 0.0};

  for (std::size_t m = 0; m < profile.size(); ++m) {
    double best = 0.0;
    for (double a : pts) best = std::max(best, profile[m](a));
    best = std::max(best, profile[m](0.0));
    if (best <= 0.0) rep.everyone_explores = false;
  }
  rep.no_cutoff = false;
  for (std::size_t m = 0; m < profile.size(); ++m) {
    if (!detail::is_cutoff_strategy(profile[m], hi, grid)) rep.no_cutoff = true;
  }
  return rep;
}

inline VerificationReport check_equilibrium(const SymmetricEquilibrium& eq, int grid = 1000, double tol = 1e-5) {
  const auto profile = eq.profile();
  return check_equilibrium(eq.params, profile, std::vector<PiecewiseValue>(profile.size(), eq.value), grid, tol);
}

inline VerificationReport check_equilibrium(const AsymmetricEquilibrium& eq, int grid = 1000, double tol = 1e-5) {
  return check_equilibrium(eq.params, eq.profile, eq.payoffs, grid, tol);
}

/// Payoff of `player` under an arbitrary profile: u = 1 beyond the stopping threshold, the
/// Feynman-Kac ODE below it, value matching at the threshold and normal reflection at 0.
/// The total intensity must stay bounded away from 0 below the threshold.
inline PiecewiseValue profile_payoff(const ModelParams& p, const StrategyProfile& profile, std::size_t player,
                                     double tol = kTolOde) {
  const double rho = p.rho(), theta = p.theta();
  const double top = profile.stopping_threshold();
  if (!std::isfinite(top)) throw Error(ErrorKind::PreconditionViolated, "profile never stops exploring");
  if (top <= 0.0) return PiecewiseValue(rho, theta, {});
  for (int i = 0; i <= 1000; ++i) {
    const double a = std::min(top * i / 1000.0, left_of(top));
    if (profile.intensity(a) < 1e-6)
      throw Error(ErrorKind::PreconditionViolated, "intensity vanishes below the stopping threshold");
  }
  const auto bps = profile.breakpoints();
  auto full = [&](double a, double u, double du) {
    return (u - (1.0 - profile[player](a))) / (profile.intensity(a) * rho) + theta * du;
  };
  auto homogeneous = [&](double a, double u, double du) { return u / (profile.intensity(a) * rho) + theta * du; };
  const auto part = integrate_ivp(full, top, 1.0, 0.0, 0.0, tol, bps);
  const auto hom = integrate_ivp(homogeneous, top, 0.0, 1.0, 0.0, tol, bps);
  const auto p0 = part.eval(0.0), h0 = hom.eval(0.0);
  const double slope = -(p0.u + p0.du) / (h0.u + h0.du);
  auto grid = integrate_ivp(full, top, 1.0, slope, 0.0, tol, bps);
  return PiecewiseValue(rho, theta, {Segment{0.0, top, std::move(grid)}});
}

/// The profile where `player` never explores and the others play the cooperative cutoff of N - 1 players.
inline StrategyProfile free_ride_profile(const ModelParams& p, int n, int player = 0) {
  const double cutoff = cooperative_cutoff(p, n - 1.0);
  std::vector<Strategy> s(n, Strategy::cutoff(cutoff));
  s[player] = Strategy();
  return StrategyProfile(std::move(s));
}

/// The cooperative cutoff played as a noncooperative profile.
inline StrategyProfile cooperative_profile(const ModelParams& p, int n) {
  return StrategyProfile(std::vector<Strategy>(n, Strategy::cutoff(cooperative_cutoff(p, n))));
}

// ---------------------------------------------------------------------------
// Dynamic-programming oracle

struct DpGrid {
  double a_max = 0.0;
  double da = 1e-3;
  double dt = 0.0;  // 0 picks the largest stable step
};

struct DpResult {
  double da = 0.0;
  double dt = 0.0;
  std::vector<double> a;
  std::vector<double> u;
  std::vector<int> policy;
  int iterations = 0;
  bool central = true;

  double value(double x) const {
    const double pos = std::clamp(x / da, 0.0, static_cast<double>(a.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), a.size() - 2);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * u[i] + t * u[i + 1];
  }
  /// First grid gap from which the greedy policy never explores again.
  double cutoff() const {
    std::size_t i = policy.size();
    while (i > 0 && policy[i - 1] == 0) --i;
    return a[std::min(i, a.size() - 1)];
  }
};

namespace detail {

/// Solves a tridiagonal system in place (Thomas algorithm).
inline void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                   std::vector<double>& rhs) {
  const std::size_t m = diag.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[m - 1] /= diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace detail

/// Best response of one player to opponents' total intensity on a discrete-time, discrete-gap
/// chain, by policy iteration over bang-bang actions. Reflection at 0 multiplies the
/// continuation by e^{da}, the normalized effect of the running maximum moving up by da.
inline DpResult dp_best_response(const ModelParams& p, const std::function<double(double)>& opponents,
                                 DpGrid grid, double team = 1.0) {
  check_primitives(p);
  const double sigma2 = p.sigma * p.sigma, mu = p.mu, r = p.r;
  if (!(grid.da > 0.0) || !(grid.a_max > 10.0 * grid.da))
    throw Error(ErrorKind::GridTooCoarse, "grid needs da > 0 and a_max well above da");
  if (assumption_holds(p, team) && grid.a_max < 2.0 * cooperative_cutoff(p, team))
    throw Error(ErrorKind::GridTooCoarse, "a_max must be at least twice the team's cooperative cutoff");

  const auto m = static_cast<std::size_t>(std::llround(grid.a_max / grid.da));
  DpResult out;
  out.da = grid.da;
  out.a.resize(m + 1);
  std::vector<double> others(m + 1);
  double k_max = 1.0;
  for (std::size_t i = 0; i <= m; ++i) {
    out.a[i] = grid.da * static_cast<double>(i);
    others[i] = opponents(out.a[i]);
    k_max = std::max(k_max, 1.0 + others[i]);
  }
  const double stable = grid.da * grid.da / (k_max * (sigma2 + std::abs(mu) * grid.da));
  out.dt = grid.dt > 0.0 ? grid.dt : stable;
  if (out.dt > stable * (1.0 + 1e-12)) throw Error(ErrorKind::GridTooCoarse, "dt violates the monotonicity bound");
  out.central = sigma2 >= grid.da * std::abs(mu);

  const double disc = std::exp(-r * out.dt);
  const double flow = -std::expm1(-r * out.dt);
  const double grow = std::exp(grid.da);
  auto probs = [&](double k_total) {
    const double var = sigma2 * k_total * out.dt / (grid.da * grid.da);
    const double drift = -mu * k_total * out.dt / grid.da;  // expected move in grid units
    if (out.central) return std::pair{0.5 * (var + drift), 0.5 * (var - drift)};
    return std::pair{0.5 * var + std::max(drift, 0.0), 0.5 * var + std::max(-drift, 0.0)};
  };
  // Right-hand side of the Bellman equation at node i for action k given u.
  auto bellman = [&](const std::vector<double>& u, std::size_t i, int k) {
    const auto [up, dn] = probs(k + others[i]);
    const double below = i == 0 ? grow * u[0] : u[i - 1];
    return flow * (1 - k) + disc * (up * u[i + 1] + dn * below + (1.0 - up - dn) * u[i]);
  };

  out.policy.assign(m + 1, 0);
  for (std::size_t i = 0; i <= m; ++i) out.policy[i] = others[i] > 0.0 ? 0 : 1;
  out.u.assign(m + 1, 1.0);
  for (out.iterations = 1; out.iterations <= 100000; ++out.iterations) {
    // Policy evaluation: unknowns u_0..u_{m-1}, u_m = 1.
    std::vector<double> lower(m, 0.0), diag(m), upper(m, 0.0), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const int k = out.policy[i];
      const auto [up, dn] = probs(k + others[i]);
      diag[i] = 1.0 - disc * (1.0 - up - dn);
      rhs[i] = flow * (1 - k);
      if (i == 0)
        diag[i] -= disc * dn * grow;
      else
        lower[i] = -disc * dn;
      if (i + 1 < m)
        upper[i] = -disc * up;
      else
        rhs[i] += disc * up;
    }
    detail::thomas(lower, diag, upper, rhs);
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      change = std::max(change, std::abs(rhs[i] - out.u[i]));
      out.u[i] = rhs[i];
    }
    out.u[m] = 1.0;

    bool stable_policy = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double keep = bellman(out.u, i, out.policy[i]);
      const double flip = bellman(out.u, i, 1 - out.policy[i]);
      if (flip > keep + 1e-15 * std::max(1.0, keep)) {
        out.policy[i] = 1 - out.policy[i];
        stable_policy = false;
      }
    }
    if (stable_policy && change < 1e-9) {
      out.policy[m] = 0;
      return out;
    }
  }
  throw Error(ErrorKind::MaxIterations, "policy iteration did not settle");
}

}  // namespace stratex
