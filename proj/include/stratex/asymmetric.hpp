#pragma once

// Turn-taking asymmetric equilibria: the average payoff, the recursive action
// assignment with its Split boundary-value problem, and the fine-partition variant.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/planner.hpp"
#include "stratex/strategy.hpp"
#include "stratex/symmetric.hpp"

namespace stratex {

struct AverageProfile {
  ModelParams params;
  double n = 2.0;
  double a_flat = 0.0;   // stopping threshold
  double a_sharp = 0.0;  // alternation region is [a_sharp, a_flat)
  double a_ddag = 0.0;   // full intensity below
  PiecewiseValue u_bar;
  ExpFamily top;  // u_bar on [a_sharp, a_flat): u = 1 - 1/N + beta
};

namespace detail {

inline void check_team(const ModelParams& p, double n) {
  validate(p, n);
  if (n < 2.0 || n != std::floor(n)) throw Error(ErrorKind::PreconditionViolated, "asymmetric equilibria need an integer N >= 2");
}

}  // namespace detail

/// Integrates the average-payoff ODE leftward from (1, 0) in closed form, one regime per
/// level band of u, and stops at the first normal-reflection crossing u + u' = 0.
inline AverageProfile build_average(const ModelParams& p, double n) {
  detail::check_team(p, n);
  const double rho = p.rho(), theta = p.theta();
  const double span = 10.0 * cooperative_cutoff(p, n);
  const double level_sharp = 2.0 - 1.0 / n;

  // Coordinates x <= 0 with the stopping point at x = 0; d = -x is the distance to it.
  struct Regime {
    SegmentForm form;
    double d_lo;
    double d_hi;
  };
  std::vector<Regime> regimes;
  auto eval = [](const SegmentForm& f, double x) { return std::visit([x](const auto& g) { return g.eval(x); }, f); };

  SegmentForm form = ExpFamily::through(rho, theta, 1.0, 1.0 - 1.0 / n, 0.0, 1.0, 0.0);
  const double levels[] = {level_sharp, n, kInf};
  double d_lo = 0.0, d_flat = kNaN;
  for (int stage = 0; stage < 3 && std::isnan(d_flat); ++stage) {
    double d_hi = span;
    if (std::isfinite(levels[stage]) && eval(form, -span).u > levels[stage]) {
      d_hi = shoot_scalar([&](double d) { return eval(form, -d).u - levels[stage]; }, d_lo, span, 1e-15);
    }
    d_flat = first_crossing(
        [&](double d) {
          const auto v = eval(form, -d);
          return v.u + v.du;
        },
        d_lo, d_hi, 512, 1e-15);
    regimes.push_back(Regime{form, d_lo, std::isnan(d_flat) ? d_hi : d_flat});
    if (!std::isnan(d_flat)) break;
    if (d_hi >= span) break;
    const auto v = eval(form, -d_hi);
    if (stage == 0)
      form = InteriorFamily::through(rho, theta, -d_hi, v.u, v.du);
    else
      form = ExpFamily::through(rho, theta, n, 0.0, -d_hi, v.u, v.du);
    d_lo = d_hi;
  }
  if (std::isnan(d_flat))
    throw Error(ErrorKind::ConvergenceFailure, "no normal-reflection crossing within the integration span");

  AverageProfile avg;
  avg.params = p;
  avg.n = n;
  avg.a_flat = d_flat;
  // Regime boundaries in gap coordinates; absent regimes collapse to 0.
  const double a_sharp = regimes.size() > 1 ? d_flat - regimes[0].d_hi : 0.0;
  const double a_ddag = regimes.size() > 2 ? d_flat - regimes[1].d_hi : 0.0;
  avg.a_sharp = a_sharp;
  avg.a_ddag = a_ddag;

  std::vector<Segment> segs;
  for (auto it = regimes.rbegin(); it != regimes.rend(); ++it) {
    SegmentForm shifted = std::visit(
        [d_flat](auto f) -> SegmentForm {
          if constexpr (requires { f.anchor; }) f.anchor += d_flat;
          return f;
        },
        it->form);
    segs.push_back(Segment{std::max(0.0, d_flat - it->d_hi), d_flat - it->d_lo, shifted});
  }
  segs.front().a_lo = 0.0;
  avg.top = std::get<ExpFamily>(segs.back().form);
  avg.u_bar = PiecewiseValue(rho, theta, std::move(segs));

  const auto v0 = avg.u_bar.eval(0.0);
  if (std::abs(v0.u + v0.du) > 1e-9 * v0.u)
    throw Error(ErrorKind::ConvergenceFailure, "average payoff misses normal reflection");
  return avg;
}

/// Switch points of one Split call and the three pieces of the explorer's payoff.
struct SplitResult {
  double a_left = 0.0;
  double a_minus = 0.0;
  double a_plus = 0.0;
  double a_right = 0.0;
  ExpFamily explore_left;   // u = beta on [a_left, a_minus)
  ExpFamily free_ride;      // u = 1 + beta on [a_minus, a_plus)
  ExpFamily explore_right;  // u = beta on [a_plus, a_right)
  double value_mismatch = 0.0;
  double slope_mismatch = 0.0;
};

namespace detail {

struct SplitShooter {
  double rho, theta;
  double a_left, a_right;
  ValuePoint right;

  struct Pieces {
    ExpFamily left, mid, right;
  };

  Pieces build(double a1, double a2) const {
    Pieces out;
    out.right = ExpFamily::through(rho, theta, 1.0, 0.0, a_right, right.u, right.du);
    const auto v2 = out.right.eval(a2);
    out.mid = ExpFamily::through(rho, theta, 1.0, 1.0, a2, v2.u, v2.du);
    const auto v1 = out.mid.eval(a1);
    out.left = ExpFamily::through(rho, theta, 1.0, 0.0, a1, v1.u, v1.du);
    return out;
  }
  ValuePoint at_left(double a1, double a2) const { return build(a1, a2).left.eval(a_left); }
};

}  // namespace detail

/// Splits [a_left, a_right] so that explore / free-ride / explore pieces reproduce the value and
/// slope of u_bar at both ends. u_bar must solve u = 1 - 1/players + beta there.
inline SplitResult split(double a_left, double a_right, const ExpFamily& u_bar, int players, double rho,
                         double theta, double tol = 1e-13) {
  if (players < 2) throw Error(ErrorKind::PreconditionViolated, "split needs a free-rider flow strictly inside (0, 1)");
  if (!(a_right > a_left)) throw Error(ErrorKind::PreconditionViolated, "split needs a_left < a_right");
  const auto left = u_bar.eval(a_left), right = u_bar.eval(a_right);
  if (!(right.u >= 1.0 - 1e-12) || !(left.u > right.u))
    throw Error(ErrorKind::PreconditionViolated, "split needs a decreasing average payoff bounded below by 1");

  const detail::SplitShooter shoot{rho, theta, a_left, a_right, right};
  const double w = a_right - a_left;
  auto value_gap = [&](double a1, double a2) { return shoot.at_left(a1, a2).u - left.u; };

  const double a1_hat = shoot_scalar([&](double a1) { return value_gap(a1, a_right); }, a_left, a_right, tol);
  auto a2_of = [&](double a1) {
    if (a1 >= a1_hat) return a_right;
    return shoot_scalar([&](double a2) { return value_gap(a1, a2); }, a1, a_right, tol);
  };
  const double a1 = shoot_scalar([&](double x) { return shoot.at_left(x, a2_of(x)).du - left.du; }, a_left,
                                 a1_hat, tol);
  const double a2 = a2_of(a1);

  const auto pieces = shoot.build(a1, a2);
  SplitResult out{a_left, a1, a2, a_right, pieces.left, pieces.mid, pieces.right, 0.0, 0.0};
  const auto got = pieces.left.eval(a_left);
  out.value_mismatch = std::abs(got.u - left.u);
  out.slope_mismatch = std::abs(got.du - left.du);
  if (out.value_mismatch > 1e-8 * std::max(1.0, left.u) || out.slope_mismatch > 1e-8 * std::max(1.0, std::abs(left.du)) ||
      !(a1 > a_left) || !(a2 > a1) || !(a_right > a2) || a2 - a1 < 1e-14 * w)
    throw Error(ErrorKind::ConvergenceFailure, "split failed to match the average payoff at the left end");
  return out;
}

struct SplitRecord {
  int player = 0;     // the explorer chosen for this call
  int available = 0;  // players available to the call
  SplitResult result;
};

struct AsymmetricEquilibrium {
  ModelParams params;
  double n = 2.0;
  AverageProfile average;
  std::vector<double> partition;  // a_sharp = p_0 < ... < p_m = a_flat
  std::vector<SplitRecord> splits;
  std::vector<PiecewiseValue> payoffs;
  StrategyProfile profile;
};

namespace detail {

struct Assignment {
  double rho, theta;
  std::vector<std::vector<Segment>> value_pieces;
  std::vector<std::vector<StrategyPiece>> action_pieces;
  std::vector<SplitRecord> splits;

  void assign(const std::vector<int>& available, int kappa, double a_l, double a_r, const ExpFamily& u_bar) {
    if (!(a_r > a_l)) return;
    if (kappa == 0 || available.size() == 1) {
      for (int m : available) {
        value_pieces[m].push_back(Segment{a_l, a_r, u_bar});
        action_pieces[m].push_back(StrategyPiece{a_l, a_r, ConstantAction{static_cast<double>(kappa)}});
      }
      return;
    }
    const int size = static_cast<int>(available.size());
    const auto s = split(a_l, a_r, u_bar, size, rho, theta);
    const int n = available.front();  // lowest index
    splits.push_back(SplitRecord{n, size, s});
    value_pieces[n].push_back(Segment{a_l, s.a_minus, s.explore_left});
    value_pieces[n].push_back(Segment{s.a_minus, s.a_plus, s.free_ride});
    value_pieces[n].push_back(Segment{s.a_plus, a_r, s.explore_right});
    action_pieces[n].push_back(StrategyPiece{a_l, s.a_minus, ConstantAction{1.0}});
    action_pieces[n].push_back(StrategyPiece{s.a_minus, s.a_plus, ConstantAction{0.0}});
    action_pieces[n].push_back(StrategyPiece{s.a_plus, a_r, ConstantAction{1.0}});

    const std::vector<int> rest(available.begin() + 1, available.end());
    const double w_all = size / (size - 1.0), w_one = -1.0 / (size - 1.0);
    assign(rest, kappa, s.a_minus, s.a_plus, combine(w_all, u_bar, w_one, s.free_ride));
    assign(rest, kappa - 1, a_l, s.a_minus, combine(w_all, u_bar, w_one, s.explore_left));
    assign(rest, kappa - 1, s.a_plus, a_r, combine(w_all, u_bar, w_one, s.explore_right));
  }
};

}  // namespace detail

/// Equilibrium for a partition of [a_sharp, a_flat) given by its interior breakpoints.
inline AsymmetricEquilibrium construct_equilibrium(const AverageProfile& avg, std::vector<double> interior = {}) {
  const double rho = avg.params.rho(), theta = avg.params.theta();
  const int n = static_cast<int>(avg.n);
  std::vector<double> cells{avg.a_sharp};
  for (double b : interior) {
    if (!(b > cells.back()) || !(b < avg.a_flat))
      throw Error(ErrorKind::PartitionInvalid, "partition must be strictly increasing inside (a_sharp, a_flat)");
    cells.push_back(b);
  }
  cells.push_back(avg.a_flat);

  detail::Assignment work{rho, theta, std::vector<std::vector<Segment>>(n), std::vector<std::vector<StrategyPiece>>(n), {}};
  std::vector<int> everyone(n);
  for (int m = 0; m < n; ++m) everyone[m] = m;
  for (std::size_t j = 0; j + 1 < cells.size(); ++j) work.assign(everyone, 1, cells[j], cells[j + 1], avg.top);

  AsymmetricEquilibrium eq;
  eq.params = avg.params;
  eq.n = avg.n;
  eq.average = avg;
  eq.partition = cells;
  eq.splits = std::move(work.splits);

  auto shared_bar = std::make_shared<const PiecewiseValue>(avg.u_bar);
  std::vector<Segment> below;
  for (const auto& s : avg.u_bar.segments()) {
    if (s.a_lo < avg.a_sharp) below.push_back(Segment{s.a_lo, std::min(s.a_hi, avg.a_sharp), s.form});
  }
  std::vector<Strategy> strategies;
  for (int m = 0; m < n; ++m) {
    auto& vp = work.value_pieces[m];
    auto& ap = work.action_pieces[m];
    std::sort(vp.begin(), vp.end(), [](const Segment& x, const Segment& y) { return x.a_lo < y.a_lo; });
    std::sort(ap.begin(), ap.end(), [](const StrategyPiece& x, const StrategyPiece& y) { return x.a_lo < y.a_lo; });
    std::vector<Segment> segs = below;
    segs.insert(segs.end(), vp.begin(), vp.end());
    eq.payoffs.emplace_back(rho, theta, std::move(segs));
    std::vector<StrategyPiece> pieces;
    if (avg.a_sharp > 0.0) pieces.push_back(StrategyPiece{0.0, avg.a_sharp, ValueShare{shared_bar, avg.n - 1.0}});
    pieces.insert(pieces.end(), ap.begin(), ap.end());
    strategies.emplace_back(std::move(pieces));
  }
  eq.profile = StrategyProfile(std::move(strategies));
  return eq;
}

inline AsymmetricEquilibrium construct_equilibrium(const ModelParams& p, double n, std::vector<double> interior = {}) {
  return construct_equilibrium(build_average(p, n), std::move(interior));
}

/// Uniform partition of [a_sharp, a_flat) into `cells` pieces (interior breakpoints only).
inline std::vector<double> uniform_partition(const AverageProfile& avg, int cells) {
  std::vector<double> out;
  for (int j = 1; j < cells; ++j) out.push_back(avg.a_sharp + (avg.a_flat - avg.a_sharp) * j / cells);
  return out;
}

struct ParetoResult {
  AsymmetricEquilibrium equilibrium;
  int cells = 1;
  double min_margin = 0.0;  // min over players and grid of u_n - U
};

/// Halves uniform cells until every player's payoff beats the symmetric payoff on [0, a_flat - eps].
inline ParetoResult pareto_equilibrium(const ModelParams& p, double n, double eps, int max_cells = 4096,
                                       int grid = 400) {
  const auto avg = build_average(p, n);
  const auto sym = solve_symmetric(p, n);
  const double top = avg.a_flat - eps;
  if (!(top > 0.0)) throw Error(ErrorKind::PreconditionViolated, "eps must be below the stopping threshold");
  for (int cells = 1; cells <= max_cells; cells *= 2) {
    auto eq = construct_equilibrium(avg, uniform_partition(avg, cells));
    double margin = kInf;
    for (int i = 0; i <= grid; ++i) {
      const double a = top * i / grid;
      for (const auto& u : eq.payoffs) margin = std::min(margin, u(a) - sym.value(a));
    }
    if (margin > 0.0) return ParetoResult{std::move(eq), cells, margin};
  }
  throw Error(ErrorKind::ConvergenceFailure, "no uniform partition up to max_cells dominates the symmetric payoff");
}

struct WelfareReport {
  double min_gain = kInf;       // min of u_bar - U on [0, a_flat)
  double threshold_gap = 0.0;   // a_flat - a_tilde
  double max_gain_beyond = 0.0; // max |u_bar - U| on [a_flat, a_flat + 1]
  int grid = 0;
  bool average_dominates = false;
  bool threshold_exceeds = false;
};

inline WelfareReport compare_welfare(const AsymmetricEquilibrium& asym, const SymmetricEquilibrium& sym,
                                     int grid = 300) {
  WelfareReport rep;
  rep.grid = grid;
  const auto& ub = asym.average.u_bar;
  const double a_flat = asym.average.a_flat;
  for (int i = 0; i < grid; ++i) {
    const double a = a_flat * i / grid;
    rep.min_gain = std::min(rep.min_gain, ub(a) - sym.value(a));
    const double b = a_flat + static_cast<double>(i) / grid;
    rep.max_gain_beyond = std::max(rep.max_gain_beyond, std::abs(ub(b) - sym.value(b)));
  }
  rep.threshold_gap = a_flat - sym.a_tilde;
  rep.average_dominates = rep.min_gain > 0.0;
  rep.threshold_exceeds = rep.threshold_gap > 0.0;
  return rep;
}

}  // namespace stratex
