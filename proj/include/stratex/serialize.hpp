#pragma once

// JSON encoding of parameters, value functions, strategies and results.
// Non-finite doubles are written as the strings "inf", "-inf" and "nan".

#include <cmath>
#include <memory>
#include <string>

#include <json.hpp>

#include "stratex/asymmetric.hpp"
#include "stratex/planner.hpp"
#include "stratex/sim.hpp"
#include "stratex/symmetric.hpp"
#include "stratex/verify.hpp"

namespace stratex {

using Json = nlohmann::json;

inline Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return kNaN;
  }
  throw Error(ErrorKind::ParseError, "expected a number, got " + j.dump());
}

inline double field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field ") + key);
  return to_double(j.at(key));
}

inline Json num_array(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(num(x));
  return out;
}

inline std::vector<double> double_array(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_double(x));
  return out;
}

// Parameters

inline void to_json(Json& j, const ModelParams& p) {
  j = Json{{"r", num(p.r)}, {"mu", num(p.mu)}, {"sigma", num(p.sigma)}, {"n_players", num(p.n_players)}};
}

/// Accepts {r, mu, sigma, n_players} or {rho, theta, n_players}; "n" is an alias of n_players.
inline void from_json(const Json& j, ModelParams& p) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "parameters must be an object");
  const char* n_key = j.contains("n_players") ? "n_players" : "n";
  const double n = j.contains(n_key) ? field(j, n_key) : 1.0;
  if (j.contains("rho") || j.contains("theta")) {
    p = ModelParams::from_rho_theta(field(j, "rho"), field(j, "theta"), n);
  } else {
    p = ModelParams{field(j, "r"), field(j, "mu"), field(j, "sigma"), n};
  }
}

// Value functions

inline Json form_to_json(const SegmentForm& form) {
  struct Visitor {
    Json operator()(const ConstantOne&) const { return Json{{"type", "constant_one"}}; }
    Json operator()(const ExpFamily& f) const {
      return Json{{"type", "exp_family"}, {"offset", num(f.offset)}, {"c1", num(f.c1)},
                  {"c2", num(f.c2)},       {"gamma1", num(f.gamma1)}, {"gamma2", num(f.gamma2)},
                  {"anchor", num(f.anchor)}, {"intensity", num(f.intensity)}};
    }
    Json operator()(const InteriorFamily& f) const {
      return Json{{"type", "interior_family"}, {"c1", num(f.c1)},   {"c2", num(f.c2)},
                  {"theta", num(f.theta)},     {"rho", num(f.rho)}, {"anchor", num(f.anchor)}};
    }
    Json operator()(const NumericGrid& g) const {
      return Json{{"type", "numeric_grid"},
                  {"knots", num_array(g.knots)},
                  {"values", num_array(g.values)},
                  {"derivs", num_array(g.derivs)},
                  {"second_lo", num_array(g.second_lo)},
                  {"second_hi", num_array(g.second_hi)}};
    }
  };
  return std::visit(Visitor{}, form);
}

inline SegmentForm form_from_json(const Json& j) {
  SegmentForm form;
  const auto type = j.at("type").get<std::string>();
  if (type == "constant_one") {
    form = ConstantOne{};
  } else if (type == "exp_family") {
    form = ExpFamily{field(j, "offset"), field(j, "c1"),     field(j, "c2"),       field(j, "gamma1"),
                     field(j, "gamma2"), field(j, "anchor"), field(j, "intensity")};
  } else if (type == "interior_family") {
    form = InteriorFamily{field(j, "c1"), field(j, "c2"), field(j, "theta"), field(j, "rho"), field(j, "anchor")};
  } else if (type == "numeric_grid") {
    NumericGrid g{double_array(j.at("knots")), double_array(j.at("values")), double_array(j.at("derivs")),
                  double_array(j.at("second_lo")), double_array(j.at("second_hi"))};
    const auto n = g.knots.size();
    if (n == 0 || g.values.size() != n || g.derivs.size() != n || g.second_lo.size() + 1 < n ||
        g.second_hi.size() != g.second_lo.size())
      throw Error(ErrorKind::ParseError, "inconsistent numeric grid");
    form = std::move(g);
  } else {
    throw Error(ErrorKind::ParseError, "unknown segment form " + type);
  }
  return form;
}

inline void to_json(Json& j, const PiecewiseValue& v) {
  Json segs = Json::array();
  for (const auto& s : v.segments()) {
    segs.push_back(Json{{"a_lo", num(s.a_lo)}, {"a_hi", num(s.a_hi)}, {"form", form_to_json(s.form)}});
  }
  j = Json{{"rho", num(v.rho())}, {"theta", num(v.theta())}, {"segments", segs}};
}

inline void from_json(const Json& j, PiecewiseValue& v) {
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) segs.push_back(Segment{field(s, "a_lo"), field(s, "a_hi"), form_from_json(s.at("form"))});
  v = PiecewiseValue(field(j, "rho"), field(j, "theta"), std::move(segs));
}

// Strategies

inline Json rule_to_json(const ActionRule& rule) {
  struct Visitor {
    Json operator()(const ConstantAction& c) const { return Json{{"type", "constant"}, {"k", num(c.k)}}; }
    Json operator()(const ValueShare& s) const {
      return Json{{"type", "value_share"}, {"denom", num(s.denom)}, {"value", *s.value}};
    }
    Json operator()(const PhiIntegral& p) const {
      return Json{{"type", "phi_integral"}, {"a_tilde", num(p.a_tilde)}, {"theta", num(p.theta)}, {"scale", num(p.scale)}};
    }
  };
  return std::visit(Visitor{}, rule);
}

inline ActionRule rule_from_json(const Json& j) {
  ActionRule rule;
  const auto type = j.at("type").get<std::string>();
  if (type == "constant") {
    const double k = field(j, "k");
    if (!(k >= 0.0 && k <= 1.0)) throw Error(ErrorKind::ParseError, "action outside [0, 1]");
    rule = ConstantAction{k};
  } else if (type == "value_share") {
    rule = ValueShare{std::make_shared<const PiecewiseValue>(j.at("value").get<PiecewiseValue>()), field(j, "denom")};
  } else if (type == "phi_integral") {
    rule = PhiIntegral{field(j, "a_tilde"), field(j, "theta"), field(j, "scale")};
  } else {
    throw Error(ErrorKind::ParseError, "unknown action rule " + type);
  }
  return rule;
}

inline void to_json(Json& j, const Strategy& s) {
  j = Json::array();
  for (const auto& p : s.pieces()) {
    j.push_back(Json{{"a_lo", num(p.a_lo)}, {"a_hi", num(p.a_hi)}, {"rule", rule_to_json(p.rule)}});
  }
}

inline void from_json(const Json& j, Strategy& s) {
  std::vector<StrategyPiece> pieces;
  for (const auto& p : j) pieces.push_back(StrategyPiece{field(p, "a_lo"), field(p, "a_hi"), rule_from_json(p.at("rule"))});
  s = Strategy(std::move(pieces));
}

inline void to_json(Json& j, const StrategyProfile& p) { j = Json{{"players", p.players()}}; }

inline void from_json(const Json& j, StrategyProfile& p) {
  p = StrategyProfile(j.at("players").get<std::vector<Strategy>>());
  if (p.size() == 0) throw Error(ErrorKind::ParseError, "profile has no players");
}

// Results

inline void to_json(Json& j, const CooperativeSolution& s) {
  j = Json{{"kind", "cooperative"},        {"params", s.params},  {"n", num(s.n)},
           {"a_star", num(s.a_star)},      {"gamma1", num(s.gamma1)}, {"gamma2", num(s.gamma2)},
           {"u_star_0", num(s.value(0.0))}, {"value", s.value}};
}

inline void from_json(const Json& j, CooperativeSolution& s) {
  s = CooperativeSolution{j.at("params").get<ModelParams>(), field(j, "n"),      field(j, "a_star"),
                          field(j, "gamma1"),                field(j, "gamma2"), j.at("value").get<PiecewiseValue>()};
}

inline void to_json(Json& j, const SymmetricEquilibrium& e) {
  j = Json{{"kind", "symmetric"},
           {"params", e.params},
           {"n", num(e.n)},
           {"a_tilde", num(e.a_tilde)},
           {"a_dagger", num(e.a_dagger)},
           {"binding", e.binding},
           {"assumption_violated", e.assumption_violated},
           {"u0", num(e.value(0.0))},
           {"k0", num(e.strategy(0.0))},
           {"value", e.value},
           {"strategy", e.strategy}};
}

inline void from_json(const Json& j, SymmetricEquilibrium& e) {
  e = SymmetricEquilibrium{j.at("params").get<ModelParams>(),
                           field(j, "n"),
                           field(j, "a_tilde"),
                           field(j, "a_dagger"),
                           j.at("binding").get<bool>(),
                           j.at("assumption_violated").get<bool>(),
                           j.at("value").get<PiecewiseValue>(),
                           j.at("strategy").get<Strategy>()};
}

inline void to_json(Json& j, const AverageProfile& a) {
  j = Json{{"params", a.params},         {"n", num(a.n)},           {"a_flat", num(a.a_flat)},
           {"a_sharp", num(a.a_sharp)},  {"a_ddag", num(a.a_ddag)}, {"u_bar", a.u_bar},
           {"top", form_to_json(a.top)}};
}

inline void from_json(const Json& j, AverageProfile& a) {
  const auto top = form_from_json(j.at("top"));
  if (!std::holds_alternative<ExpFamily>(top)) throw Error(ErrorKind::ParseError, "top must be an exp_family");
  a = AverageProfile{j.at("params").get<ModelParams>(), field(j, "n"), field(j, "a_flat"), field(j, "a_sharp"),
                     field(j, "a_ddag"), j.at("u_bar").get<PiecewiseValue>(), std::get<ExpFamily>(top)};
}

inline ExpFamily exp_family(const Json& j) {
  const auto f = form_from_json(j);
  if (!std::holds_alternative<ExpFamily>(f)) throw Error(ErrorKind::ParseError, "expected an exp_family");
  return std::get<ExpFamily>(f);
}

inline void to_json(Json& j, const SplitRecord& s) {
  const auto& r = s.result;
  j = Json{{"player", s.player},
           {"available", s.available},
           {"a_left", num(r.a_left)},
           {"a_minus", num(r.a_minus)},
           {"a_plus", num(r.a_plus)},
           {"a_right", num(r.a_right)},
           {"explore_left", form_to_json(r.explore_left)},
           {"free_ride", form_to_json(r.free_ride)},
           {"explore_right", form_to_json(r.explore_right)},
           {"value_mismatch", num(r.value_mismatch)},
           {"slope_mismatch", num(r.slope_mismatch)}};
}

inline void from_json(const Json& j, SplitRecord& s) {
  s.player = j.at("player").get<int>();
  s.available = j.at("available").get<int>();
  s.result = SplitResult{field(j, "a_left"),
                         field(j, "a_minus"),
                         field(j, "a_plus"),
                         field(j, "a_right"),
                         exp_family(j.at("explore_left")),
                         exp_family(j.at("free_ride")),
                         exp_family(j.at("explore_right")),
                         field(j, "value_mismatch"),
                         field(j, "slope_mismatch")};
}

inline void to_json(Json& j, const AsymmetricEquilibrium& e) {
  j = Json{{"kind", "asymmetric"},
           {"params", e.params},
           {"n", num(e.n)},
           {"average", e.average},
           {"partition", num_array(e.partition)},
           {"splits", e.splits},
           {"payoffs", e.payoffs},
           {"profile", e.profile}};
}

inline void from_json(const Json& j, AsymmetricEquilibrium& e) {
  e = AsymmetricEquilibrium{j.at("params").get<ModelParams>(),
                            field(j, "n"),
                            j.at("average").get<AverageProfile>(),
                            double_array(j.at("partition")),
                            j.at("splits").get<std::vector<SplitRecord>>(),
                            j.at("payoffs").get<std::vector<PiecewiseValue>>(),
                            j.at("profile").get<StrategyProfile>()};
}

inline void to_json(Json& j, const CheckEntry& c) {
  j = Json{{"measured", num(c.measured)}, {"tolerance", num(c.tolerance)}, {"grid", c.grid}, {"passed", c.passed}};
}

inline void from_json(const Json& j, CheckEntry& c) {
  c = CheckEntry{field(j, "measured"), field(j, "tolerance"), j.at("grid").get<int>(), j.at("passed").get<bool>()};
}

inline void to_json(Json& j, const VerificationReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.best_response_violations)
    violations.push_back(Json{{"a", num(v.a)}, {"player", v.player}, {"beta", num(v.beta)}, {"action", num(v.action)}});
  j = Json{{"normal_reflection", r.normal_reflection},
           {"smooth_pasting", r.smooth_pasting},
           {"c1_continuity", r.c1_continuity},
           {"hjb_max_residual", r.hjb_max_residual},
           {"best_response", r.best_response},
           {"best_response_violations", violations},
           {"payoff_bounds", r.payoff_bounds},
           {"encouragement", r.encouragement},
           {"everyone_explores", r.everyone_explores},
           {"no_cutoff", r.no_cutoff},
           {"conditions_hold", r.conditions_hold()},
           {"passed", r.passed()}};
}

inline void from_json(const Json& j, VerificationReport& r) {
  r.normal_reflection = j.at("normal_reflection").get<CheckEntry>();
  r.smooth_pasting = j.at("smooth_pasting").get<CheckEntry>();
  r.c1_continuity = j.at("c1_continuity").get<CheckEntry>();
  r.hjb_max_residual = j.at("hjb_max_residual").get<CheckEntry>();
  r.best_response = j.at("best_response").get<CheckEntry>();
  r.best_response_violations.clear();
  for (const auto& v : j.at("best_response_violations"))
    r.best_response_violations.push_back(
        BestResponseViolation{field(v, "a"), v.at("player").get<int>(), field(v, "beta"), field(v, "action")});
  r.payoff_bounds = j.at("payoff_bounds").get<CheckEntry>();
  r.encouragement = j.at("encouragement").get<CheckEntry>();
  r.everyone_explores = j.at("everyone_explores").get<bool>();
  r.no_cutoff = j.at("no_cutoff").get<bool>();
}

inline void to_json(Json& j, const SimulationResult& r) {
  j = Json{{"n_paths", r.n_paths},
           {"horizon", num(r.horizon)},
           {"truncation_bound", num(r.truncation_bound)},
           {"absorbed", r.absorbed},
           {"mean", num_array(r.mean)},
           {"std_error", num_array(r.std_error)}};
}

inline void from_json(const Json& j, SimulationResult& r) {
  r = SimulationResult{};
  r.n_paths = j.at("n_paths").get<std::size_t>();
  r.horizon = field(j, "horizon");
  r.truncation_bound = field(j, "truncation_bound");
  r.absorbed = j.at("absorbed").get<std::size_t>();
  r.mean = double_array(j.at("mean"));
  r.std_error = double_array(j.at("std_error"));
}

inline void to_json(Json& j, const LongRunTest& t) {
  j = Json{{"n", t.n},
           {"point_mass_observed", num(t.point_mass_observed)},
           {"point_mass_expected", num(t.point_mass_expected)},
           {"binomial_z", num(t.binomial_z)},
           {"tail_count", t.tail_count},
           {"tail_mean", num(t.tail_mean)},
           {"ks_distance", num(t.ks_distance)},
           {"ks_critical", num(t.ks_critical)},
           {"significance", num(t.significance)},
           {"point_mass_ok", t.point_mass_ok},
           {"ks_ok", t.ks_ok},
           {"passed", t.passed()}};
}

inline void from_json(const Json& j, LongRunTest& t) {
  t.n = j.at("n").get<std::size_t>();
  t.point_mass_observed = field(j, "point_mass_observed");
  t.point_mass_expected = field(j, "point_mass_expected");
  t.binomial_z = field(j, "binomial_z");
  t.tail_count = j.at("tail_count").get<std::size_t>();
  t.tail_mean = field(j, "tail_mean");
  t.ks_distance = field(j, "ks_distance");
  t.ks_critical = field(j, "ks_critical");
  t.significance = field(j, "significance");
  t.point_mass_ok = j.at("point_mass_ok").get<bool>();
  t.ks_ok = j.at("ks_ok").get<bool>();
}

}  // namespace stratex
