#pragma once

// Markov strategies a -> k(a) in [0, 1]: right-continuous, piecewise defined.

#include <algorithm>
#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "stratex/odekit.hpp"

namespace stratex {

struct ConstantAction {
  double k = 0.0;
};

/// k(a) = clamp((u(a) - 1) / denom, 0, 1): the common action that makes
/// u = 1 + K_{-n} hold for a symmetric group of denom + 1 players.
struct ValueShare {
  std::shared_ptr<const PiecewiseValue> value;
  double denom = 1.0;
};

/// k(a) = scale * integral_0^{a_tilde - a} phi_theta(z) dz, clamped to [0, 1].
struct PhiIntegral {
  double a_tilde = 0.0;
  double theta = 0.0;
  double scale = 1.0;
};

using ActionRule = std::variant<ConstantAction, ValueShare, PhiIntegral>;

struct StrategyPiece {
  double a_lo = 0.0;
  double a_hi = kInf;
  ActionRule rule;
};

inline double apply_rule(const ActionRule& rule, double a) {
  struct Visitor {
    double a;
    double operator()(const ConstantAction& c) const { return c.k; }
    double operator()(const ValueShare& s) const {
      return std::clamp(((*s.value)(a) - 1.0) / s.denom, 0.0, 1.0);
    }
    double operator()(const PhiIntegral& p) const {
      return std::clamp(p.scale * phi_theta_integral(p.theta, p.a_tilde - a), 0.0, 1.0);
    }
  };
  return std::visit(Visitor{a}, rule);
}

class Strategy {
 public:
  Strategy() : pieces_{StrategyPiece{0.0, kInf, ConstantAction{0.0}}} {}
  explicit Strategy(std::vector<StrategyPiece> pieces) : pieces_(std::move(pieces)) {
    std::erase_if(pieces_, [](const StrategyPiece& p) { return !(p.a_hi > p.a_lo); });
    if (pieces_.empty() || std::isfinite(pieces_.back().a_hi))
      pieces_.push_back(StrategyPiece{pieces_.empty() ? 0.0 : pieces_.back().a_hi, kInf, ConstantAction{0.0}});
  }

  /// k = 1 on [0, cutoff), 0 beyond.
  static Strategy cutoff(double cutoff_gap) {
    return Strategy({StrategyPiece{0.0, cutoff_gap, ConstantAction{1.0}}});
  }

  double operator()(double a) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), a,
                               [](double x, const StrategyPiece& p) { return x < p.a_lo; });
    const StrategyPiece& p = it == pieces_.begin() ? pieces_.front() : *(it - 1);
    return apply_rule(p.rule, a);
  }

  const std::vector<StrategyPiece>& pieces() const { return pieces_; }

  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].a_lo);
    return out;
  }

  /// Start of the trailing run of zero-action constant pieces.
  double stopping_threshold() const {
    double bar = kInf;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
      const auto* c = std::get_if<ConstantAction>(&it->rule);
      if (!c || c->k != 0.0) break;
      bar = it->a_lo;
    }
    return bar;
  }

 private:
  std::vector<StrategyPiece> pieces_;
};

class StrategyProfile {
 public:
  StrategyProfile() = default;
  explicit StrategyProfile(std::vector<Strategy> players) : players_(std::move(players)) {}

  std::size_t size() const { return players_.size(); }
  const Strategy& operator[](std::size_t n) const { return players_[n]; }
  const std::vector<Strategy>& players() const { return players_; }

  double intensity(double a) const {
    double k = 0.0;
    for (const auto& s : players_) k += s(a);
    return k;
  }

  double others(double a, std::size_t n) const {
    double k = 0.0;
    for (std::size_t m = 0; m < players_.size(); ++m) {
      if (m != n) k += players_[m](a);
    }
    return k;
  }

  /// Gap beyond which every player exploits.
  double stopping_threshold() const {
    double bar = 0.0;
    for (const auto& s : players_) bar = std::max(bar, s.stopping_threshold());
    return bar;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& s : players_) {
      auto b = s.breakpoints();
      out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::vector<Strategy> players_;
};

}  // namespace stratex
