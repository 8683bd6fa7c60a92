// Command-line front end: solvers, verification, simulation, sweeps and figure data.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stratex/serialize.hpp"
#include "stratex/stratex.hpp"

namespace fs = std::filesystem;
using namespace stratex;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitVerification = 4;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::NoSignChange:
    case ErrorKind::MaxIterations:
    case ErrorKind::StepUnderflow:
      return kExitConvergence;
    default:
      return kExitInvalid;
  }
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::PreconditionViolated, "cannot write " + path.string());
  out << text;
}

/// Prints to stdout, or writes to `path` when it is set.
void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct ParamFlags {
  std::optional<double> r, mu, sigma, rho, theta, n;
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--r", r, "discount rate");
    app->add_option("--mu", mu, "landscape drift");
    app->add_option("--sigma", sigma, "landscape volatility");
    app->add_option("--rho", rho, "sigma^2 / (2 r); implies sigma = sqrt(2)");
    app->add_option("--theta", theta, "2 mu / sigma^2");
    app->add_option("--n", n, "number of players");
    app->add_option("--params", file, "JSON parameter file");
  }

  ModelParams get() const {
    ModelParams p;
    if (!file.empty()) {
      p = read_json(file).get<ModelParams>();
    } else if (rho || theta) {
      if (!rho || !theta) throw Error(ErrorKind::InvalidPrimitive, "--rho and --theta go together");
      p = ModelParams::from_rho_theta(*rho, *theta, 1.0);
    } else {
      if (!r || !mu || !sigma) throw Error(ErrorKind::InvalidPrimitive, "give --r, --mu and --sigma, or --rho and --theta");
      p = ModelParams{*r, *mu, *sigma, 1.0};
    }
    if (n) p.n_players = *n;
    check_primitives(p);
    return p;
  }
};

int team_size(const ModelParams& p) {
  const double n = p.n_players;
  if (!(n >= 1.0) || std::abs(n - std::round(n)) > 1e-12)
    throw Error(ErrorKind::InvalidPrimitive, "this command needs an integer number of players");
  return static_cast<int>(std::lround(n));
}

// CSV rows

const char* kCoopHeader = "n_players,r,rho,theta,a_star,u_star_0,u_hat_0,class\n";
const char* kSymHeader = "n_players,r,rho,theta,a_tilde,a_dagger,binding,u0,k0,assumption_violated\n";

std::string coop_csv(const CoopRow& c) {
  return fmt(c.n_players) + "," + fmt(c.r) + "," + fmt(c.rho) + "," + fmt(c.theta) + "," + fmt(c.a_star) + "," +
         fmt(c.u_star_0) + "," + fmt(c.u_hat_0) + "," + std::string(to_string(c.landscape)) + "\n";
}

std::string sym_csv(const SymmetricRow& s) {
  return fmt(s.n_players) + "," + fmt(s.r) + "," + fmt(s.rho) + "," + fmt(s.theta) + "," + fmt(s.a_tilde) + "," +
         fmt(s.a_dagger) + "," + (s.binding ? "1" : "0") + "," + fmt(s.u0) + "," + fmt(s.k0) + "," +
         (s.assumption_violated ? "1" : "0") + "\n";
}

// Profiles given by name or file

struct LoadedProfile {
  ModelParams params;
  StrategyProfile profile;
  std::vector<PiecewiseValue> payoffs;  // constructed payoffs when known
};

LoadedProfile load_profile(const std::string& spec, const ParamFlags& flags, const std::vector<double>& partition) {
  LoadedProfile out;
  if (spec == "coop" || spec == "symmetric" || spec == "asymmetric" || spec == "free-ride") {
    out.params = flags.get();
    const int n = team_size(out.params);
    if (spec == "coop") {
      const auto sol = solve_cooperative(out.params, n);
      out.profile = cooperative_profile(out.params, n);
      out.payoffs.assign(n, sol.value);
    } else if (spec == "symmetric") {
      const auto eq = solve_symmetric(out.params, n);
      out.profile = eq.profile();
      out.payoffs.assign(n, eq.value);
    } else if (spec == "asymmetric") {
      auto eq = construct_equilibrium(out.params, n, partition);
      out.profile = eq.profile;
      out.payoffs = eq.payoffs;
    } else {
      out.profile = free_ride_profile(out.params, n);
    }
    return out;
  }
  const Json j = read_json(spec);
  const std::string kind = j.value("kind", "");
  if (kind == "symmetric") {
    const auto eq = j.get<SymmetricEquilibrium>();
    out.params = eq.params;
    out.profile = eq.profile();
    out.payoffs.assign(out.profile.size(), eq.value);
  } else if (kind == "asymmetric") {
    const auto eq = j.get<AsymmetricEquilibrium>();
    out.params = eq.params;
    out.profile = eq.profile;
    out.payoffs = eq.payoffs;
  } else if (kind == "cooperative") {
    const auto sol = j.get<CooperativeSolution>();
    const int n = static_cast<int>(std::lround(sol.n));
    out.params = sol.params;
    out.profile = StrategyProfile(std::vector<Strategy>(n, sol.strategy()));
    out.payoffs.assign(n, sol.value);
  } else {
    out.params = j.contains("params") ? j.at("params").get<ModelParams>() : flags.get();
    out.profile = j.get<StrategyProfile>();
  }
  out.params.n_players = static_cast<double>(out.profile.size());
  return out;
}

// Figures

struct Series {
  std::string name, file, x_label, y_label;
  Json annotations = Json::object();
};

std::string grid_csv(const std::string& header, const std::vector<double>& xs,
                     const std::vector<std::function<double(double)>>& cols) {
  std::ostringstream os;
  os << header << "\n";
  for (double x : xs) {
    os << fmt(x);
    for (const auto& c : cols) os << "," << fmt(c(x));
    os << "\n";
  }
  return os.str();
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) xs[i] = lo + (hi - lo) * i / (points - 1);
  return xs;
}

Json figure(const std::string& id, const std::string& caption, const std::vector<Series>& series) {
  Json list = Json::array();
  for (const auto& s : series)
    list.push_back(Json{{"name", s.name},
                        {"csv", s.file},
                        {"x_label", s.x_label},
                        {"y_label", s.y_label},
                        {"annotations", s.annotations}});
  return Json{{"figure", id}, {"caption", caption}, {"series", list}};
}

Json fig1(const fs::path& dir, int points) {
  std::vector<Series> series;
  for (int n : {2, 4}) {
    const auto p = ModelParams::from_rho_theta(2.0, -1.0, n);
    const auto eq = solve_symmetric(p, n);
    const auto xs = linspace(0.0, 1.25 * eq.a_tilde, points);
    const std::string file = "fig1_k_dagger_n" + std::to_string(n) + ".csv";
    write_text(dir / file, grid_csv("a,k", xs, {[&](double a) { return k_dagger(eq, a); }}));
    series.push_back({"k_dagger N=" + std::to_string(n), file, "a", "k",
                      Json{{"a_tilde", num(eq.a_tilde)}, {"a_dagger", num(eq.a_dagger)}, {"binding", eq.binding}}});
  }
  return figure("fig1", "symmetric equilibrium actions, rho = 2, theta = -1, N = 2 and N = 4", series);
}

Json fig2(const fs::path& dir, int points) {
  const auto p = ModelParams::from_rho_theta(2.0, -1.0, 2);
  const auto c2 = solve_cooperative(p, 2), c1 = solve_cooperative(p, 1);
  const auto sym = solve_symmetric(p, 2);
  const auto xs = linspace(0.0, 1.25 * c2.a_star, points);
  write_text(dir / "fig2_values.csv",
             grid_csv("a,u_hat,u_star_2,u_dagger_2,u_star_1", xs,
                      {[&](double a) { return complete_info_value(p, 2, a); }, [&](double a) { return c2.value(a); },
                       [&](double a) { return sym.value(a); }, [&](double a) { return c1.value(a); }}));
  return figure("fig2", "value functions from top to bottom: u_hat, u_star_2, u_dagger_2, u_star_1",
                {{"values", "fig2_values.csv", "a", "u",
                  Json{{"a_star_2", num(c2.a_star)}, {"a_tilde", num(sym.a_tilde)}, {"a_star_1", num(c1.a_star)}}}});
}

Json fig3(const fs::path& dir, int points) {
  const auto p = ModelParams::from_rho_theta(2.0, -1.0, 2);
  const auto c2 = solve_cooperative(p, 2);
  const auto sym = solve_symmetric(p, 2);
  const auto asym = construct_equilibrium(p, 2);
  const auto coop = cooperative_profile(p, 2), symp = sym.profile();
  const auto xs = linspace(0.0, 1.1 * std::max(c2.a_star, asym.average.a_flat), points);
  write_text(dir / "fig3_intensity.csv",
             grid_csv("a,cooperative,asymmetric,symmetric", xs,
                      {[&](double a) { return coop.intensity(a); }, [&](double a) { return asym.profile.intensity(a); },
                       [&](double a) { return symp.intensity(a); }}));
  return figure("fig3", "total exploration intensity: cooperative, asymmetric and symmetric, N = 2",
                {{"intensity", "fig3_intensity.csv", "a", "K",
                  Json{{"a_star_2", num(c2.a_star)},
                       {"a_flat", num(asym.average.a_flat)},
                       {"a_tilde", num(sym.a_tilde)}}}});
}

Json fig4(const fs::path& dir, int points) {
  const auto p = ModelParams::from_rho_theta(2.0, -1.0, 2);
  const auto sym = solve_symmetric(p, 2);
  const auto asym = construct_equilibrium(p, 2);
  const auto xs = linspace(0.0, 1.1 * asym.average.a_flat, points);
  write_text(dir / "fig4_payoffs.csv",
             grid_csv("a,u_bar,u_1,u_2,u_dagger", xs,
                      {[&](double a) { return asym.average.u_bar(a); }, [&](double a) { return asym.payoffs[0](a); },
                       [&](double a) { return asym.payoffs[1](a); }, [&](double a) { return sym.value(a); }}));
  Json marks{{"a_flat", num(asym.average.a_flat)}, {"a_sharp", num(asym.average.a_sharp)}, {"a_tilde", num(sym.a_tilde)}};
  if (!asym.splits.empty()) {
    marks["a_bar_F"] = num(asym.splits.front().result.a_minus);
    marks["a_bar_E"] = num(asym.splits.front().result.a_plus);
  }
  return figure("fig4", "average and individual asymmetric payoffs against the symmetric payoff, N = 2",
                {{"payoffs", "fig4_payoffs.csv", "a", "u", marks}});
}

Json fig5(const fs::path& dir, double r_low, double r_high, int n_max) {
  std::vector<Series> series;
  for (const auto& [label, r] : {std::pair<std::string, double>{"r_low", r_low}, {"r_high", r_high}}) {
    const ModelParams base{r, -0.09, std::sqrt(2.0), 1.0};
    std::vector<ModelParams> cells;
    for (int n = 1; n <= n_max; ++n) cells.push_back(base.with_n(n));
    const auto rows = symmetric_sweep(cells);
    std::ostringstream os;
    os << "n,a_dagger,a_tilde,u0,solved\n";
    for (const auto& row : rows)
      os << fmt(row.n_players) << "," << fmt(row.a_dagger) << "," << fmt(row.a_tilde) << "," << fmt(row.u0) << ","
         << (row.solved ? 1 : 0) << "\n";
    const std::string file = "fig5_thresholds_" + label + ".csv";
    write_text(dir / file, os.str());
    const auto lim = critical_limits(base);
    series.push_back({"thresholds " + label, file, "N", "a",
                      Json{{"r", num(r)}, {"r_hat", lim.r_hat ? num(*lim.r_hat) : Json(nullptr)},
                           {"n_hat", lim.n_hat ? num(*lim.n_hat) : Json(nullptr)}}});
  }
  return figure("fig5", "a_dagger and a_tilde against N, theta = -0.09, sigma = sqrt(2)", series);
}

// Subcommand bodies

struct Options {
  ParamFlags params;
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 1;

  // solve-asymmetric / verify
  std::vector<double> partition;
  int cells = 0;
  std::optional<double> pareto_eps;
  std::string grids_dir;
  int grid = 1000;
  double tol = 1e-5;

  // sim
  std::string profile = "coop";
  std::size_t paths = 10000;
  double dt = 1e-3;
  double horizon = 0.0;
  double a0 = 0.0;
  bool antithetic = false;
  std::string paths_csv;

  // sweep
  std::string over = "n";
  std::string solver = "symmetric";
  double from = 1.0, to = 8.0, step = 1.0;

  // figures
  std::string set = "all";
  std::optional<double> r_low, r_high;
  int points = 401;
  int n_max = 60;
};

int run_solve_coop(const Options& o) {
  const auto p = o.params.get();
  if (o.format == "csv") {
    emit(std::string(kCoopHeader) + coop_csv(coop_row(p)), o.out);
  } else {
    emit(dump(solve_cooperative(p, p.n_players)), o.out);
  }
  return 0;
}

int run_solve_symmetric(const Options& o) {
  const auto p = o.params.get();
  if (o.format == "csv") {
    const auto row = symmetric_row(p);
    if (!row.solved) solve_symmetric(p, p.n_players);  // rethrows the solver's error
    emit(std::string(kSymHeader) + sym_csv(row), o.out);
  } else {
    emit(dump(solve_symmetric(p, p.n_players)), o.out);
  }
  return 0;
}

void write_asym_grids(const AsymmetricEquilibrium& eq, const fs::path& dir, int points) {
  const auto xs = linspace(0.0, 1.1 * eq.average.a_flat, points);
  for (std::size_t m = 0; m < eq.profile.size(); ++m) {
    write_text(dir / ("player" + std::to_string(m + 1) + ".csv"),
               grid_csv("a,k,u", xs, {[&](double a) { return eq.profile[m](a); }, [&](double a) { return eq.payoffs[m](a); }}));
  }
}

int run_solve_asymmetric(const Options& o) {
  const auto p = o.params.get();
  const int n = team_size(p);
  Json j;
  AsymmetricEquilibrium eq;
  if (o.pareto_eps) {
    auto res = pareto_equilibrium(p, n, *o.pareto_eps);
    eq = std::move(res.equilibrium);
    j = eq;
    j["pareto"] = Json{{"eps", num(*o.pareto_eps)}, {"cells", res.cells}, {"min_margin", num(res.min_margin)}};
  } else {
    auto interior = o.partition;
    if (o.cells > 0) interior = uniform_partition(build_average(p, n), o.cells);
    eq = construct_equilibrium(p, n, interior);
    j = eq;
  }
  if (!o.grids_dir.empty()) write_asym_grids(eq, o.grids_dir, o.points);
  emit(dump(j), o.out);
  return 0;
}

int run_verify(const Options& o) {
  auto lp = load_profile(o.profile, o.params, o.partition);
  if (lp.payoffs.empty()) {
    for (std::size_t m = 0; m < lp.profile.size(); ++m) lp.payoffs.push_back(profile_payoff(lp.params, lp.profile, m));
  }
  const auto rep = check_equilibrium(lp.params, lp.profile, lp.payoffs, o.grid, o.tol);
  emit(dump(rep), o.out);
  return rep.passed() ? 0 : kExitVerification;
}

int run_sim(const Options& o) {
  const auto lp = load_profile(o.profile, o.params, o.partition);
  SimConfig cfg;
  cfg.n_paths = o.paths;
  cfg.dt = o.dt;
  cfg.horizon = o.horizon;
  cfg.seed = o.seed;
  cfg.a0 = o.a0;
  cfg.antithetic = o.antithetic;
  cfg.keep_paths = !o.paths_csv.empty();
  const auto res = simulate(lp.params, lp.profile, cfg);
  Json j = res;
  j["params"] = lp.params;
  j["a0"] = num(o.a0);
  j["dt"] = num(o.dt);
  j["seed"] = o.seed;
  if (!lp.payoffs.empty()) {
    std::vector<double> ref;
    for (const auto& u : lp.payoffs) ref.push_back(u(o.a0));
    j["reference"] = num_array(ref);
  }
  if (cfg.keep_paths) {
    std::ostringstream os;
    os << "path,standard,exploration";
    for (std::size_t m = 0; m < lp.profile.size(); ++m) os << ",payoff_" << m + 1;
    os << "\n";
    for (std::size_t i = 0; i < res.n_paths; ++i) {
      os << i << "," << fmt(res.standard[i]) << "," << fmt(res.exploration[i]);
      for (const auto& col : res.path_payoffs) os << "," << fmt(col[i]);
      os << "\n";
    }
    write_text(o.paths_csv, os.str());
  }
  emit(dump(j), o.out);
  return 0;
}

int run_sweep(const Options& o) {
  const auto base = o.params.get();
  if (!(o.step > 0.0) || o.to < o.from) throw Error(ErrorKind::PreconditionViolated, "need step > 0 and to >= from");
  std::vector<double> values;
  const auto count = static_cast<int>(std::floor((o.to - o.from) / o.step + 1e-9));
  for (int i = 0; i <= count; ++i) values.push_back(o.from + o.step * i);
  std::vector<ModelParams> cells;
  if (o.over == "n") {
    cells = sweep_over_n(base, values);
  } else if (o.over == "r") {
    cells = sweep_over_r(base, values);
  } else {
    throw Error(ErrorKind::PreconditionViolated, "--over takes n or r");
  }
  std::string text;
  if (o.solver == "coop") {
    text = kCoopHeader;
    for (const auto& row : coop_sweep(cells)) text += coop_csv(row);
  } else if (o.solver == "symmetric") {
    text = kSymHeader;
    for (const auto& row : symmetric_sweep(cells)) text += sym_csv(row);
  } else {
    throw Error(ErrorKind::PreconditionViolated, "--solver takes coop or symmetric");
  }
  emit(text, o.out);
  return 0;
}

int run_figures(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path("figures") : fs::path(o.out);
  const bool all = o.set == "all";
  const std::vector<std::string> known{"fig1", "fig2", "fig3", "fig4", "fig5"};
  if (!all && std::find(known.begin(), known.end(), o.set) == known.end())
    throw Error(ErrorKind::PreconditionViolated, "unknown figure set " + o.set);
  if ((all || o.set == "fig5") && (!o.r_low || !o.r_high))
    throw Error(ErrorKind::InvalidPrimitive, "fig5 needs --r-low and --r-high");
  fs::create_directories(dir);
  Json figures = Json::array();
  if (all || o.set == "fig1") figures.push_back(fig1(dir, o.points));
  if (all || o.set == "fig2") figures.push_back(fig2(dir, o.points));
  if (all || o.set == "fig3") figures.push_back(fig3(dir, o.points));
  if (all || o.set == "fig4") figures.push_back(fig4(dir, o.points));
  if (all || o.set == "fig5") figures.push_back(fig5(dir, *o.r_low, *o.r_high, o.n_max));
  write_text(dir / "manifest.json", dump(Json{{"figures", figures}}));
  std::cout << (dir / "manifest.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium exploration in strategic experimentation games"};
  app.require_subcommand(1);
  Options o;

  auto with_common = [&](CLI::App* sub, bool params = true) {
    if (params) o.params.add(sub);
    sub->add_option("--out,-o", o.out, "output file (directory for figures)");
    return sub;
  };

  auto* coop = with_common(app.add_subcommand("solve-coop", "cooperative cutoff and value"));
  coop->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));
  auto* sym = with_common(app.add_subcommand("solve-symmetric", "symmetric Markov perfect equilibrium"));
  sym->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));

  auto* asym = with_common(app.add_subcommand("solve-asymmetric", "asymmetric equilibrium construction"));
  asym->add_option("--partition", o.partition, "interior cell boundaries in (a_sharp, a_flat)")->delimiter(',');
  asym->add_option("--cells", o.cells, "uniform partition with this many cells");
  asym->add_option("--pareto", o.pareto_eps, "refine until every player beats the symmetric payoff below a_flat - eps");
  asym->add_option("--grids", o.grids_dir, "directory for per-player (a, k, u) CSV grids");
  asym->add_option("--points", o.points, "grid points");

  auto* ver = with_common(app.add_subcommand("verify", "check the equilibrium conditions of a profile"));
  ver->add_option("--profile", o.profile, "coop, symmetric, asymmetric, free-ride or a JSON file");
  ver->add_option("--partition", o.partition, "asymmetric cell boundaries")->delimiter(',');
  ver->add_option("--grid", o.grid, "check grid size");
  ver->add_option("--tol", o.tol, "tolerance");

  auto* sim = with_common(app.add_subcommand("sim", "Monte Carlo simulation of a profile"));
  sim->add_option("--profile", o.profile, "coop, symmetric, asymmetric, free-ride or a JSON file");
  sim->add_option("--partition", o.partition, "asymmetric cell boundaries")->delimiter(',');
  sim->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
  sim->add_option("--dt", o.dt, "time step")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", o.horizon, "time horizon; 0 derives it from the tail bound");
  sim->add_option("--seed", o.seed, "master seed");
  sim->add_option("--a0", o.a0, "initial gap")->check(CLI::NonNegativeNumber);
  sim->add_flag("--antithetic", o.antithetic, "antithetic pairs");
  sim->add_option("--paths-csv", o.paths_csv, "per-path CSV output");

  auto* sweep = with_common(app.add_subcommand("sweep", "CSV sweep over N or r"));
  sweep->add_option("--over", o.over, "n or r")->check(CLI::IsMember({"n", "r"}));
  sweep->add_option("--solver", o.solver, "coop or symmetric")->check(CLI::IsMember({"coop", "symmetric"}));
  sweep->add_option("--from", o.from);
  sweep->add_option("--to", o.to);
  sweep->add_option("--step", o.step);

  auto* figs = with_common(app.add_subcommand("figures", "figure data as CSV with a manifest"), false);
  figs->add_option("--set", o.set, "fig1 ... fig5 or all");
  figs->add_option("--r-low", o.r_low, "patient discount rate for fig5");
  figs->add_option("--r-high", o.r_high, "impatient discount rate for fig5");
  figs->add_option("--points", o.points, "grid points per curve");
  figs->add_option("--n-max", o.n_max, "largest N for fig5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*coop) return run_solve_coop(o);
    if (*sym) return run_solve_symmetric(o);
    if (*asym) return run_solve_asymmetric(o);
    if (*ver) return run_verify(o);
    if (*sim) return run_sim(o);
    if (*sweep) return run_sweep(o);
    if (*figs) return run_figures(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
