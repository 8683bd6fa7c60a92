#pragma once

// Piecewise normalized value functions u(a) on the gap axis, the closed-form
// solution families of the exploration ODEs, and the numeric plumbing
// (adaptive IVP integration, bracketing root finds) used to pin down their
// free constants.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "stratex/error.hpp"
#include "stratex/model.hpp"

namespace stratex {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kTolOde = 1e-10;
inline constexpr double kTolRoot = 1e-10;

// ---------------------------------------------------------------------------
// Scalar helpers

/// (1 - e^{-theta z}) / theta, with phi_0(z) = z.
inline double phi_theta(double theta, double z) {
  if (std::abs(theta) <= 1e-8) return z - 0.5 * theta * z * z + theta * theta * z * z * z / 6.0;
  return -std::expm1(-theta * z) / theta;
}

/// Integral of phi_theta over [0, z]: (theta z + e^{-theta z} - 1) / theta^2.
inline double phi_theta_integral(double theta, double z) {
  const double x = theta * z;
  if (std::abs(x) < 0.1) {
    // sum_{k>=2} (-theta)^{k-2} z^k / k!
    double term = 0.5 * z * z;
    double sum = term;
    for (int k = 3; k < 40; ++k) {
      term *= -x / k;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (x + std::expm1(-x)) / (theta * theta);
}

/// (e^{theta x} - 1) / theta, equal to x at theta = 0.
inline double expm1_ratio(double theta, double x) {
  if (theta == 0.0) return x;
  return std::expm1(theta * x) / theta;
}

// ---------------------------------------------------------------------------
// Segment forms

struct ValuePoint {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
};

/// u = 1, the stopping region.
struct ConstantOne {
  ValuePoint eval(double) const { return {1.0, 0.0, 0.0}; }
};

/// offset + c1 e^{gamma1 (a - anchor)} + c2 e^{gamma2 (a - anchor)}: the solution of
/// u = offset + K beta(a, u) with gamma1, gamma2 the roots of gamma (gamma - theta) = 1/(K rho).
struct ExpFamily {
  double offset = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double gamma1 = -1.0;
  double gamma2 = 1.0;
  double anchor = 0.0;
  double intensity = 1.0;

  ValuePoint eval(double a) const {
    const double x = a - anchor;
    const double e1 = c1 == 0.0 ? 0.0 : c1 * std::exp(gamma1 * x);
    const double e2 = c2 == 0.0 ? 0.0 : c2 * std::exp(gamma2 * x);
    return {offset + e1 + e2, gamma1 * e1 + gamma2 * e2, gamma1 * gamma1 * e1 + gamma2 * gamma2 * e2};
  }

  /// Solution through (x0, value, slope).
  static ExpFamily through(double rho, double theta, double intensity, double offset, double x0,
                           double value, double slope) {
    const Roots g = quadratic_roots(rho, theta, intensity);
    const double w = value - offset;
    const double span = g.gamma2 - g.gamma1;
    return ExpFamily{offset,           (g.gamma2 * w - slope) / span, (slope - g.gamma1 * w) / span,
                     g.gamma1,         g.gamma2,                      x0,
                     intensity};
  }

  ExpFamily reanchored(double x0) const {
    ExpFamily out = *this;
    out.c1 = c1 * std::exp(gamma1 * (x0 - anchor));
    out.c2 = c2 * std::exp(gamma2 * (x0 - anchor));
    out.anchor = x0;
    return out;
  }
};

/// alpha * x + beta * y for two families sharing gamma1, gamma2 (same intensity).
inline ExpFamily combine(double alpha, const ExpFamily& x, double beta, const ExpFamily& y) {
  const ExpFamily yy = y.reanchored(x.anchor);
  ExpFamily out = x;
  out.offset = alpha * x.offset + beta * yy.offset;
  out.c1 = alpha * x.c1 + beta * yy.c1;
  out.c2 = alpha * x.c2 + beta * yy.c2;
  return out;
}

/// General solution of beta(a, u) = 1 (interior allocation), written around an anchor x0:
/// u = c1 + c2 (e^{theta (a - x0)} - 1)/theta + Phi_theta(x0 - a)/rho,
/// where Phi_theta is the integral of phi_theta. Same family as C1 + C2 e^{theta a} - a/(rho theta).
struct InteriorFamily {
  double c1 = 1.0;
  double c2 = 0.0;
  double theta = 0.0;
  double rho = 1.0;
  double anchor = 0.0;

  ValuePoint eval(double a) const {
    const double x = a - anchor;
    const double ex = std::exp(theta * x);
    return {c1 + c2 * expm1_ratio(theta, x) + phi_theta_integral(theta, -x) / rho,
            c2 * ex - phi_theta(theta, -x) / rho, c2 * theta * ex + ex / rho};
  }

  static InteriorFamily through(double rho, double theta, double x0, double value, double slope) {
    return InteriorFamily{value, slope, theta, rho, x0};
  }

  /// From C1 + C2 e^{theta a} - a/(rho theta) (theta != 0) or C1 + C2 a + a^2/(2 rho) (theta = 0).
  static InteriorFamily from_general(double big_c1, double big_c2, double theta, double rho) {
    if (theta == 0.0) return InteriorFamily{big_c1, big_c2, 0.0, rho, 0.0};
    return InteriorFamily{big_c1 + big_c2, big_c2 * theta - 1.0 / (theta * rho), theta, rho, 0.0};
  }
};

/// Dense numeric solution: cubic Hermite in (u, u') on each knot interval; u'' is the linear
/// interpolation of the ODE right-hand side stored at the interval's two ends.
struct NumericGrid {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> derivs;
  std::vector<double> second_lo;  // u'' at the left end of interval i
  std::vector<double> second_hi;  // u'' at the right end of interval i

  ValuePoint eval(double a) const {
    const std::size_t n = knots.size();
    if (n == 1) return {values[0], derivs[0], second_lo.empty() ? 0.0 : second_lo[0]};
    auto it = std::upper_bound(knots.begin(), knots.end(), a);
    std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
    i = std::min(i, n - 2);
    const double h = knots[i + 1] - knots[i];
    const double t = (a - knots[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double y0 = values[i], y1 = values[i + 1];
    const double m0 = derivs[i] * h, m1 = derivs[i + 1] * h;
    const double u = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
                     (t3 - t2) * m1;
    const double du = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
                       (3 * t2 - 2 * t) * m1) /
                      h;
    const double d2u = (1.0 - t) * second_lo[i] + t * second_hi[i];
    return {u, du, d2u};
  }
};

using SegmentForm = std::variant<ConstantOne, ExpFamily, InteriorFamily, NumericGrid>;

struct Segment {
  double a_lo = 0.0;
  double a_hi = kInf;
  SegmentForm form;

  ValuePoint eval(double a) const {
    return std::visit([a](const auto& f) { return f.eval(a); }, form);
  }
};

inline std::string_view form_name(const SegmentForm& f) {
  switch (f.index()) {
    case 0: return "ConstantOne";
    case 1: return "ExpFamily";
    case 2: return "InteriorFamily";
    default: return "NumericGrid";
  }
}

// ---------------------------------------------------------------------------
// Piecewise value function

class PiecewiseValue {
 public:
  PiecewiseValue() = default;

  PiecewiseValue(double rho, double theta, std::vector<Segment> segments)
      : rho_(rho), theta_(theta), segments_(std::move(segments)) {
    normalize();
  }

  double rho() const { return rho_; }
  double theta() const { return theta_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Start of the trailing ConstantOne segment (the stopping threshold).
  double stopping_threshold() const {
    double bar = kInf;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
      if (!std::holds_alternative<ConstantOne>(it->form)) break;
      bar = it->a_lo;
    }
    return bar;
  }

  /// Internal breakpoints (segment boundaries strictly inside (0, inf)).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].a_lo);
    return out;
  }

  /// Value and right-sided derivatives at a >= 0.
  ValuePoint eval(double a) const { return segment_at(a).eval(a); }

  /// Value and left-sided derivatives (the segment whose closure ends at a).
  ValuePoint eval_left(double a) const {
    for (const auto& s : segments_) {
      if (a > s.a_lo && a <= s.a_hi) return s.eval(a);
    }
    return eval(a);
  }

  double operator()(double a) const { return eval(a).u; }

  const Segment& segment_at(double a) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), a,
                               [](double x, const Segment& s) { return x < s.a_lo; });
    if (it == segments_.begin()) return segments_.front();
    return *(it - 1);
  }

  bool is_breakpoint(double a, double rel = 1e-12) const {
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      if (std::abs(a - segments_[i].a_lo) <= rel * std::max(1.0, std::abs(a))) return true;
    }
    return false;
  }

 private:
  void normalize() {
    std::vector<Segment> kept;
    for (auto& s : segments_) {
      if (s.a_hi > s.a_lo) kept.push_back(std::move(s));
    }
    segments_ = std::move(kept);
    if (segments_.empty()) segments_.push_back(Segment{0.0, kInf, ConstantOne{}});
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      if (std::abs(segments_[i].a_lo - segments_[i - 1].a_hi) > 1e-12 * std::max(1.0, segments_[i].a_lo))
        throw Error(ErrorKind::PreconditionViolated, "segments must be contiguous and ordered");
    }
    if (std::isfinite(segments_.back().a_hi)) segments_.push_back(Segment{segments_.back().a_hi, kInf, ConstantOne{}});
  }

  double rho_ = 1.0;
  double theta_ = 0.0;
  std::vector<Segment> segments_;
};

/// beta(a, u) = rho (u'' - theta u') from a value point.
inline double beta_of(const ValuePoint& v, double rho, double theta) { return rho * (v.d2u - theta * v.du); }

/// Benefit-cost ratio at an interior point of a segment.
inline double beta(const PiecewiseValue& pv, double a) {
  if (pv.is_breakpoint(a)) throw Error(ErrorKind::AtBreakpoint, "beta requested at a breakpoint; use one-sided eval");
  return beta_of(pv.eval(a), pv.rho(), pv.theta());
}

/// Left limit offset used when a caller needs u'' just below a breakpoint.
inline double left_of(double a) { return a - 1e-9 * std::max(1.0, a); }

// ---------------------------------------------------------------------------
// Root finding

/// Bracketing root find (TOMS 748, Brent-class). When `expand` is set and the
/// bracket has no sign change, hi is pushed outward geometrically first.
template <class F>
double shoot_scalar(F&& residual, double lo, double hi, double tol = kTolRoot, bool expand = false,
                    int max_expansions = 60) {
  double flo = residual(lo);
  double fhi = residual(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  int expansions = 0;
  while (std::signbit(flo) == std::signbit(fhi)) {
    if (!expand || expansions++ >= max_expansions || !std::isfinite(fhi))
      throw Error(ErrorKind::NoSignChange, "residual has the same sign at both bracket ends");
    const double width = hi - lo;
    lo = hi;
    flo = fhi;
    hi = lo + 2.0 * width;
    fhi = residual(hi);
    if (fhi == 0.0) return hi;
  }
  auto width_ok = [tol](double a, double b) {
    return std::abs(b - a) <= tol * std::max(1.0, std::min(std::abs(a), std::abs(b)));
  };
  std::uintmax_t iters = 300;
  auto f = [&](double x) { return residual(x); };
  auto bracket = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, width_ok, iters);
  if (iters >= 300) throw Error(ErrorKind::MaxIterations, "root bracket did not shrink within 300 iterations");
  double a = bracket.first, b = bracket.second;
  double fa = residual(a), fb = residual(b);
  // Bisect further while the residual is still above tol and the bracket can shrink.
  for (int k = 0; k < 200 && std::min(std::abs(fa), std::abs(fb)) > tol; ++k) {
    const double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b)) break;
    const double fm = residual(m);
    if (std::signbit(fm) == std::signbit(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

/// First sign change of f scanning from `from` toward `to` on n equal steps, then refined.
/// Returns nullopt-like NaN when no sign change is found.
template <class F>
double first_crossing(F&& f, double from, double to, int n_scan = 256, double tol = 1e-13) {
  double x0 = from;
  double f0 = f(x0);
  if (f0 == 0.0) return x0;
  for (int i = 1; i <= n_scan; ++i) {
    const double x1 = from + (to - from) * static_cast<double>(i) / n_scan;
    const double f1 = f(x1);
    if (f1 == 0.0) return x1;
    if (std::signbit(f1) != std::signbit(f0)) {
      return shoot_scalar(f, std::min(x0, x1), std::max(x0, x1), tol);
    }
    x0 = x1;
    f0 = f1;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// IVP integration

/// Right-hand side g(a, u, u') of u'' = g.
using SecondOrderRhs = std::function<double(double, double, double)>;

/// Adaptive Dormand-Prince integration of u'' = g(a, u, u') from (a0, u0, du0) to a1 in either
/// direction. Declared breakpoints of g are forced to be step boundaries.
inline NumericGrid integrate_ivp(const SecondOrderRhs& g, double a0, double u0, double du0, double a1,
                                 double tol = kTolOde, std::span<const double> breakpoints = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;

  const double dir = a1 >= a0 ? 1.0 : -1.0;
  std::vector<double> stops;
  for (double b : breakpoints) {
    if ((b - a0) * dir > 0.0 && (a1 - b) * dir > 0.0) stops.push_back(b);
  }
  std::sort(stops.begin(), stops.end(), [dir](double x, double y) { return x * dir < y * dir; });
  stops.push_back(a1);

  State y{u0, du0};
  double a = a0;
  auto controlled = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
  // Observation stops at most this far apart keep the cubic Hermite dense output near the
  // integrator's own accuracy.
  const double max_step = std::abs(a1 - a0) / 128.0;

  std::vector<NumericGrid> pieces;
  for (double stop : stops) {
    if (stop == a) continue;
    std::vector<std::array<double, 3>> obs;
    const double span = stop - a;
    // g is only ever evaluated strictly inside the piece, so a jump of g at a breakpoint is
    // seen from the correct side.
    const double nudge = 1e-12 * std::max(1.0, std::abs(span));
    const double lo = std::min(a, stop) + nudge, hi = std::max(a, stop) - nudge;
    auto system = [&g, lo, hi](const State& s, State& dsdt, double t) {
      dsdt[0] = s[1];
      dsdt[1] = g(std::clamp(t, lo, hi), s[0], s[1]);
    };
    const int n_sub = std::max(1, static_cast<int>(std::ceil(std::abs(span) / max_step - 1e-9)));
    try {
      for (int j = 0; j < n_sub; ++j) {
        const double from = a + span * j / n_sub;
        const double to = j + 1 == n_sub ? stop : a + span * (j + 1) / n_sub;
        const std::size_t before = obs.size();
        odeint::integrate_adaptive(controlled, system, y, from, to, (to - from) / 4.0,
                                   [&obs](const State& s, double t) { obs.push_back({t, s[0], s[1]}); });
        if (before > 0) obs.erase(obs.begin() + static_cast<std::ptrdiff_t>(before));
      }
    } catch (const std::exception& e) {
      throw Error(ErrorKind::StepUnderflow, std::string("integration failed: ") + e.what());
    }
    for (const auto& o : obs) {
      if (!std::isfinite(o[1]) || !std::isfinite(o[2]))
        throw Error(ErrorKind::StepUnderflow, "solution blew up during integration");
    }
    NumericGrid piece;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      piece.knots.push_back(obs[i][0]);
      piece.values.push_back(obs[i][1]);
      piece.derivs.push_back(obs[i][2]);
    }
    for (std::size_t i = 0; i + 1 < obs.size(); ++i) {
      const double g0 = g(std::clamp(obs[i][0], lo, hi), obs[i][1], obs[i][2]);
      const double g1 = g(std::clamp(obs[i + 1][0], lo, hi), obs[i + 1][1], obs[i + 1][2]);
      piece.second_lo.push_back(g0);
      piece.second_hi.push_back(g1);
    }
    pieces.push_back(std::move(piece));
    a = stop;
  }

  // Merge pieces into one increasing grid.
  NumericGrid out;
  if (dir < 0) std::reverse(pieces.begin(), pieces.end());
  for (auto& p : pieces) {
    if (dir < 0) {
      std::reverse(p.knots.begin(), p.knots.end());
      std::reverse(p.values.begin(), p.values.end());
      std::reverse(p.derivs.begin(), p.derivs.end());
      std::reverse(p.second_lo.begin(), p.second_lo.end());
      std::reverse(p.second_hi.begin(), p.second_hi.end());
      std::swap(p.second_lo, p.second_hi);
    }
    const std::size_t skip = out.knots.empty() ? 0 : 1;  // shared breakpoint knot
    out.knots.insert(out.knots.end(), p.knots.begin() + skip, p.knots.end());
    out.values.insert(out.values.end(), p.values.begin() + skip, p.values.end());
    out.derivs.insert(out.derivs.end(), p.derivs.begin() + skip, p.derivs.end());
    out.second_lo.insert(out.second_lo.end(), p.second_lo.begin(), p.second_lo.end());
    out.second_hi.insert(out.second_hi.end(), p.second_hi.begin(), p.second_hi.end());
  }
  if (out.knots.empty()) {
    out.knots = {a0};
    out.values = {u0};
    out.derivs = {du0};
    out.second_lo = {g(a0, u0, du0)};
  }
  return out;
}

}  // namespace stratex
