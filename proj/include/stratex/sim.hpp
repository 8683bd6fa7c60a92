#pragma once

// Monte Carlo simulation of the controlled, reflected gap process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "stratex/model.hpp"
#include "stratex/odekit.hpp"
#include "stratex/parallel.hpp"
#include "stratex/planner.hpp"
#include "stratex/strategy.hpp"

namespace stratex {

enum class ReflectionScheme { Bridge, Overshoot };

struct SimConfig {
  std::size_t n_paths = 10000;
  double horizon = 0.0;  // 0 picks the horizon from truncation_tol
  double dt = 1e-3;
  double a0 = 0.0;
  double s0 = 0.0;
  std::uint64_t seed = 1;
  bool antithetic = false;
  double truncation_tol = 1e-4;
  ReflectionScheme scheme = ReflectionScheme::Bridge;
  bool keep_paths = false;
  bool until_stopped = false;  // keep stepping past the horizon (up to 100x) until exploration stops
};

struct SimulationResult {
  std::vector<double> mean;       // per player, normalized payoff
  std::vector<double> std_error;  // per player
  std::vector<double> standard;   // long-run standard per path (final S)
  std::vector<double> exploration;
  std::vector<std::vector<double>> path_payoffs;  // [player][path] when kept
  std::size_t n_paths = 0;
  std::size_t absorbed = 0;
  double horizon = 0.0;
  double truncation_bound = 0.0;
};

/// E[exp(max_{y <= x} (mu y + sigma B_y))].
inline double expected_exp_running_max(double mu, double sigma, double x) {
  if (x <= 0.0) return 1.0;
  const boost::math::normal_distribution<double> std_normal;
  const double sx = sigma * std::sqrt(x);
  auto tail = [&](double z) {
    const double a = boost::math::cdf(boost::math::complement(std_normal, (z - mu * x) / sx));
    const double b = std::exp(2.0 * mu * z / (sigma * sigma)) * boost::math::cdf(std_normal, (-z - mu * x) / sx);
    const double v = std::exp(z) * (a + b);
    return std::isfinite(v) ? v : 0.0;  // far tail: 0 * inf
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return 1.0 + integrator.integrate(tail, 0.0, kInf);
}

/// Bound on the discounted payoff left after time T for any profile of n players,
/// from E[e^{M_X}] with explored amount X <= n t. Infinite unless n rho (1 + theta) < 1.
inline double truncation_bound(const ModelParams& p, double n, double horizon) {
  if (!assumption_holds(p, n)) return kInf;
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double s) {
    const double t = horizon + s;
    const double v = p.r * std::exp(-p.r * t) * expected_exp_running_max(p.mu, p.sigma, n * t);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrator.integrate(f, 0.0, kInf);
}

/// Smallest horizon (to 1%) whose truncation bound is below tol.
inline double auto_horizon(const ModelParams& p, double n, double tol) {
  if (!assumption_holds(p, n)) throw Error(ErrorKind::AssumptionViolated, "no finite truncation bound");
  double hi = 1.0;
  while (truncation_bound(p, n, hi) > tol) {
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorKind::ConvergenceFailure, "horizon search diverged");
  }
  double lo = 0.0;
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    (truncation_bound(p, n, mid) > tol ? lo : hi) = mid;
  }
  return hi;
}

namespace detail {

struct PathOutcome {
  std::vector<double> payoff;
  double standard = 0.0;
  double explored = 0.0;
  bool absorbed = false;
};

inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

inline PathOutcome simulate_path(const ModelParams& p, const StrategyProfile& profile, const SimConfig& cfg,
                                 double horizon, double stop_at, std::uint64_t stream, bool flip) {
  const std::size_t players = profile.size();
  PathOutcome out;
  out.payoff.assign(players, 0.0);
  auto rng = path_rng(cfg.seed, stream);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const double dt = cfg.dt, step_disc = std::exp(-p.r * dt), step_flow = -std::expm1(-p.r * dt);
  const double sigma2 = p.sigma * p.sigma;
  double a = cfg.a0, s = cfg.s0, x = 0.0, disc = 1.0, growth = 1.0;
  std::vector<double> k(players);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const std::size_t cap = cfg.until_stopped ? 100 * steps : steps;
  for (std::size_t step = 0; step < cap; ++step) {
    double total = 0.0;
    for (std::size_t m = 0; m < players; ++m) total += (k[m] = profile[m](a));
    if (total <= 0.0) {
      // Nothing moves again: every player earns the current standard forever.
      for (std::size_t m = 0; m < players; ++m) out.payoff[m] += disc * growth;
      out.absorbed = true;
      break;
    }
    for (std::size_t m = 0; m < players; ++m) out.payoff[m] += disc * step_flow * (1.0 - k[m]) * growth;

    const double xi = flip ? -normal(rng) : normal(rng);
    const double var = sigma2 * total * dt;
    const double inc = -p.mu * total * dt + std::sqrt(var) * xi;  // change of the gap
    double next = a + inc;
    if (cfg.scheme == ReflectionScheme::Bridge) {
      const double u = 1.0 - uniform(rng);
      const double log_u = std::log(u);
      // Minimum of the Brownian bridge from 0 to inc with variance var.
      const double low = 0.5 * (inc - std::sqrt(inc * inc - 2.0 * var * log_u));
      if (a + low < 0.0) {
        const double push = -(a + low);
        next += push;
        s += push;
        growth = std::exp(s - cfg.s0);
      }
      // Crossing of the stopping threshold inside the step ends exploration there.
      if (std::isfinite(stop_at) && a < stop_at && next < stop_at) {
        const double cross = std::exp(-2.0 * (stop_at - a) * (stop_at - next) / var);
        if (uniform(rng) < cross) next = stop_at;
      }
    } else if (next < 0.0) {
      s -= next;
      next = 0.0;
      growth = std::exp(s - cfg.s0);
    }
    a = next;
    x += total * dt;
    disc *= step_disc;
  }
  out.standard = s;
  out.explored = x;
  return out;
}

}  // namespace detail

inline SimulationResult simulate(const ModelParams& p, const StrategyProfile& profile, const SimConfig& cfg) {
  check_primitives(p);
  if (cfg.n_paths < 1 || !(cfg.dt > 0.0)) throw Error(ErrorKind::PreconditionViolated, "need n_paths >= 1 and dt > 0");
  if (cfg.antithetic && cfg.n_paths % 2 != 0)
    throw Error(ErrorKind::PreconditionViolated, "antithetic sampling needs an even number of paths");
  const double n = static_cast<double>(profile.size());
  SimulationResult res;
  res.n_paths = cfg.n_paths;
  res.horizon = cfg.horizon > 0.0 ? cfg.horizon : auto_horizon(p, n, cfg.truncation_tol);
  if (res.horizon < cfg.dt) throw Error(ErrorKind::PreconditionViolated, "horizon shorter than one step");
  res.truncation_bound = truncation_bound(p, n, res.horizon);
  const double stop_at = profile.stopping_threshold();

  std::vector<detail::PathOutcome> paths(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t i) {
    const bool flip = cfg.antithetic && i % 2 == 1;
    const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
    paths[i] = detail::simulate_path(p, profile, cfg, res.horizon, stop_at, stream, flip);
  });

  const std::size_t players = profile.size();
  const std::size_t units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  res.mean.resize(players);
  res.std_error.resize(players);
  if (cfg.keep_paths) res.path_payoffs.assign(players, {});
  for (std::size_t m = 0; m < players; ++m) {
    std::vector<double> est(units);
    for (std::size_t j = 0; j < units; ++j)
      est[j] = cfg.antithetic ? 0.5 * (paths[2 * j].payoff[m] + paths[2 * j + 1].payoff[m]) : paths[j].payoff[m];
    const double mean = pairwise_sum(est) / static_cast<double>(units);
    std::vector<double> sq(units);
    for (std::size_t j = 0; j < units; ++j) sq[j] = (est[j] - mean) * (est[j] - mean);
    const double var = units > 1 ? pairwise_sum(sq) / static_cast<double>(units - 1) : 0.0;
    res.mean[m] = mean;
    res.std_error[m] = std::sqrt(var / static_cast<double>(units));
    if (cfg.keep_paths) {
      for (const auto& path : paths) res.path_payoffs[m].push_back(path.payoff[m]);
    }
  }
  for (const auto& path : paths) {
    res.standard.push_back(path.standard);
    res.exploration.push_back(path.explored);
    if (path.absorbed) ++res.absorbed;
  }
  return res;
}

struct LongRunTest {
  std::size_t n = 0;
  double point_mass_observed = 0.0;
  double point_mass_expected = 0.0;
  double binomial_z = 0.0;
  std::size_t tail_count = 0;
  double tail_mean = 0.0;
  double ks_distance = 0.0;
  double ks_critical = 0.0;
  double significance = 0.01;
  bool point_mass_ok = false;
  bool ks_ok = false;
  bool passed() const { return point_mass_ok && ks_ok; }
};

/// Tests long-run standards against longrun_standard_distribution: a binomial test of the point mass
/// at s0 and a Kolmogorov-Smirnov test of the exponential excess.
inline LongRunTest longrun_test(const std::vector<double>& samples, double theta, double a_bar, double a0, double s0,
                                double significance = 0.01) {
  if (samples.size() < 1000) throw Error(ErrorKind::InsufficientSamples, "long-run test needs at least 1000 samples");
  const auto dist = longrun_standard_distribution(theta, a_bar, a0, s0);
  const boost::math::normal_distribution<double> std_normal;
  LongRunTest t;
  t.n = samples.size();
  t.significance = significance;
  t.point_mass_expected = dist.point_mass;

  std::vector<double> tail;
  const double eps = 1e-12 * std::max(1.0, std::abs(s0));
  for (double v : samples) {
    if (v > s0 + eps) tail.push_back(v - s0);
  }
  t.tail_count = tail.size();
  t.point_mass_observed = 1.0 - static_cast<double>(tail.size()) / static_cast<double>(t.n);
  const double pm = t.point_mass_expected;
  const double z_crit = boost::math::quantile(boost::math::complement(std_normal, significance / 2.0));
  if (pm <= 0.0 || pm >= 1.0) {
    t.binomial_z = t.point_mass_observed == pm ? 0.0 : kInf;
  } else {
    t.binomial_z = (t.point_mass_observed - pm) / std::sqrt(pm * (1.0 - pm) / static_cast<double>(t.n));
  }
  t.point_mass_ok = std::abs(t.binomial_z) <= z_crit;

  if (tail.empty()) {
    t.ks_ok = dist.mean <= 0.0 || pm >= 1.0;
    return t;
  }
  std::sort(tail.begin(), tail.end());
  t.tail_mean = pairwise_sum(tail) / static_cast<double>(tail.size());
  const double m = static_cast<double>(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double f = dist.tail_cdf(tail[i]);
    t.ks_distance = std::max({t.ks_distance, std::abs((i + 1) / m - f), std::abs(f - i / m)});
  }
  // Asymptotic Kolmogorov critical value.
  t.ks_critical = std::sqrt(-0.5 * std::log(significance / 2.0)) / std::sqrt(m);
  t.ks_ok = t.ks_distance <= t.ks_critical;
  return t;
}

struct QEstimate {
  double closed_form = 0.0;
  double pathwise = kNaN;
  double pathwise_se = kNaN;
};

/// Probability that the first-best technology ends up explored under stopping threshold a_bar.
/// The closed form is the lower bound 1 - P(M > max{a0, a_bar}) with M exponential of mean 1/lambda.
inline double q_closed_form(const ModelParams& p, double n, double a_bar, double a0) {
  validate(p, n);
  return -std::expm1(-p.lambda(n) * std::max(a0, a_bar));
}

/// Closed form plus, when n_paths > 0, a landscape-sampling estimate on a grid of step dx.
inline QEstimate q_estimate(const ModelParams& p, double n, double a_bar, double a0, std::size_t n_paths = 0,
                            std::uint64_t seed = 1, double dx = 1e-3) {
  QEstimate q;
  q.closed_form = q_closed_form(p, n, a_bar, a0);
  if (n_paths == 0) return q;
  const double delta = p.delta(n), lambda = p.lambda(n);
  std::vector<double> hit(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    auto rng = detail::path_rng(seed, i);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> beyond(lambda);
    double w = -a0, best = 0.0, x = 0.0;
    double best_net = w;  // max of W(x) - delta x over explored x
    while (a0 < a_bar && best - w < a_bar) {
      w += p.mu * dx + p.sigma * std::sqrt(dx) * normal(rng);
      x += dx;
      best = std::max(best, w);
      best_net = std::max(best_net, w - delta * x);
    }
    // Beyond the explored set the net landscape restarts from W(x) - delta x.
    hit[i] = (w - delta * x + beyond(rng) <= best_net) ? 1.0 : 0.0;
  });
  const double mean = pairwise_sum(hit) / static_cast<double>(n_paths);
  q.pathwise = mean;
  q.pathwise_se = std::sqrt(mean * (1.0 - mean) / static_cast<double>(n_paths));
  return q;
}

}  // namespace stratex
