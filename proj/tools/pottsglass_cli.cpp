// Batch front-end: config parsing, subcommand dispatch, machine-readable
// output. Exit codes: 0 success, 1 computational failure, 2 config error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pottsglass/finite_n.hpp"
#include "pottsglass/functional.hpp"
#include "pottsglass/model.hpp"
#include "pottsglass/optimize.hpp"
#include "pottsglass/paths.hpp"
#include "pottsglass/pde.hpp"
#include "pottsglass/rpc.hpp"

using nlohmann::json;
using namespace pottsglass;

namespace {

struct CliFlags {
  std::string config_path;
  std::string out_path;
  std::string format;  // empty = per-command default
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid_points = 0;
  double grid_extent = 0.0;
  int threads = 1;
};

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw std::invalid_argument(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) throw std::invalid_argument("unknown key: " + where + "." + it.key());
  }
}

json load_config(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("missing --config");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json cfg = json::parse(in);
  expect_keys(cfg, "config",
              {"model", "alpha", "grid", "seed", "minimize", "oracle", "finite_n"});
  return cfg;
}

MixtureXi parse_model(const json& cfg) {
  if (!cfg.contains("model")) throw std::invalid_argument("missing model section");
  const json& m = cfg["model"];
  expect_keys(m, "model", {"D", "betas"});
  if (!m.contains("D") || !m.contains("betas"))
    throw std::invalid_argument("model needs D and betas");
  std::map<int, double> betas;
  for (auto it = m["betas"].begin(); it != m["betas"].end(); ++it) {
    int p = 0;
    std::size_t used = 0;
    try {
      p = std::stoi(it.key(), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != it.key().size())
      throw std::invalid_argument("unknown key: model.betas." + it.key());
    betas[p] = it.value().get<double>();
  }
  return MixtureXi::from_betas(m["D"].get<int>(), betas);
}

StepCdf parse_alpha(const json& cfg) {
  if (!cfg.contains("alpha")) return make_step_cdf({0.0, 1.0}, {1.0});
  const json& a = cfg["alpha"];
  expect_keys(a, "alpha", {"t", "m"});
  if (!a.contains("t") || !a.contains("m"))
    throw std::invalid_argument("alpha needs t and m");
  return make_step_cdf(a["t"].get<std::vector<double>>(),
                       a["m"].get<std::vector<double>>());
}

std::uint64_t choose_seed(const json& cfg, const CliFlags& fl) {
  if (fl.seed_set) return fl.seed;
  if (cfg.contains("seed")) return cfg["seed"].get<std::uint64_t>();
  return 0;
}

GridSpec choose_grid(const MixtureXi& xi, const json& cfg, const CliFlags& fl,
                     bool for_minimize) {
  GridSpec g = for_minimize ? minimize_default_grid(xi) : GridSpec::defaults_for(xi);
  if (cfg.contains("grid")) {
    const json& j = cfg["grid"];
    expect_keys(j, "grid", {"points", "extent"});
    if (j.contains("points")) g.points = j["points"].get<int>();
    if (j.contains("extent")) g.extent = j["extent"].get<double>();
  }
  if (fl.grid_points > 0) g.points = fl.grid_points;
  if (fl.grid_extent > 0.0) g.extent = fl.grid_extent;
  return g;
}

json step_cdf_json(const StepCdf& a) {
  return json{{"t", a.t}, {"m", a.m}};
}

void emit(const CliFlags& fl, const std::string& payload) {
  if (fl.out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(fl.out_path);
  if (!out) throw std::runtime_error("cannot write output: " + fl.out_path);
  out << payload;
  if (!payload.empty() && payload.back() != '\n') out << '\n';
}

std::string pick_format(const CliFlags& fl, const char* fallback) {
  std::string f = fl.format.empty() ? fallback : fl.format;
  if (f != "json" && f != "csv")
    throw std::invalid_argument("format must be json or csv");
  return f;
}

int cmd_evaluate(const json& cfg, const CliFlags& fl, bool check_lemma_flag) {
  MixtureXi xi = parse_model(cfg);
  StepCdf alpha = parse_alpha(cfg);
  GridSpec grid = choose_grid(xi, cfg, fl, false);

  FTerms terms = f_terms(xi, alpha, grid);
  json out = {
      {"value", terms.value},
      {"terms",
       {{"phi0", terms.phi0}, {"theta_term", terms.theta_term}, {"correction", terms.correction}}},
      {"grid", {{"points", grid.points}, {"extent", grid.extent}}},
      {"alpha", step_cdf_json(alpha)},
  };
  if (check_lemma_flag) {
    MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
    double p_value = p_functional(xi, pi);
    out["p_value"] = p_value;
    out["discrepancy"] = std::abs(terms.value - p_value);
  }

  if (pick_format(fl, "json") == "json") {
    emit(fl, out.dump(2));
  } else {
    std::ostringstream csv;
    csv << "key,value\n";
    csv << "value," << terms.value << "\n";
    csv << "phi0," << terms.phi0 << "\n";
    csv << "theta_term," << terms.theta_term << "\n";
    csv << "correction," << terms.correction << "\n";
    if (check_lemma_flag) {
      csv << "p_value," << out["p_value"].get<double>() << "\n";
      csv << "discrepancy," << out["discrepancy"].get<double>() << "\n";
    }
    emit(fl, csv.str());
  }
  return 0;
}

MinimizeOptions parse_minimize_options(const json& cfg) {
  MinimizeOptions opts;
  if (!cfg.contains("minimize")) return opts;
  const json& j = cfg["minimize"];
  expect_keys(j, "minimize",
              {"k", "fd_step", "max_iters", "tol_value", "tol_l1", "starts"});
  if (j.contains("k")) opts.k = j["k"].get<int>();
  if (j.contains("fd_step")) opts.fd_step = j["fd_step"].get<double>();
  if (j.contains("max_iters")) opts.max_iters = j["max_iters"].get<int>();
  if (j.contains("tol_value")) opts.tol_value = j["tol_value"].get<double>();
  if (j.contains("tol_l1")) opts.tol_l1 = j["tol_l1"].get<double>();
  if (j.contains("starts")) opts.starts = j["starts"].get<int>();
  return opts;
}

int cmd_minimize(const json& cfg, const CliFlags& fl) {
  MixtureXi xi = parse_model(cfg);
  MinimizeOptions opts = parse_minimize_options(cfg);
  GridSpec grid = choose_grid(xi, cfg, fl, true);
  std::uint64_t seed = choose_seed(cfg, fl);

  ConvexityReport conv = check_convexity_sample(xi, 200, seed + 1);
  if (conv.max_violation > 1e-9)
    std::cerr << "warning: xi failed the midpoint convexity sweep (violation "
              << conv.max_violation << ")\n";

  json out = {{"grid", {{"points", grid.points}, {"extent", grid.extent}}},
              {"seed", seed},
              {"options",
               {{"k", opts.k},
                {"fd_step", opts.fd_step},
                {"max_iters", opts.max_iters},
                {"tol_value", opts.tol_value},
                {"tol_l1", opts.tol_l1},
                {"starts", opts.starts}}}};
  MinimizeResult best;
  if (opts.starts >= 2) {
    UniquenessReport rep = multistart(xi, opts, opts.starts, seed, grid);
    best = rep.best;
    out["uniqueness"] = {{"max_l1_spread", rep.max_l1_spread},
                         {"max_value_spread", rep.max_value_spread},
                         {"values", rep.values}};
  } else {
    best = minimize_f(xi, opts, seed, grid);
  }
  out["value"] = best.value;
  out["alpha_star"] = step_cdf_json(best.alpha_star);
  out["iterations"] = best.iterations;
  out["gradient_norm_final"] = best.gradient_norm_final;
  out["trace"] = best.trace;

  if (pick_format(fl, "json") == "json") {
    emit(fl, out.dump(2));
  } else {
    std::ostringstream csv;
    csv << "iteration,value\n";
    for (std::size_t i = 0; i < best.trace.size(); ++i)
      csv << i << "," << best.trace[i] << "\n";
    emit(fl, csv.str());
  }
  return 0;
}

int cmd_oracle(const json& cfg, const CliFlags& fl) {
  MixtureXi xi = parse_model(cfg);
  StepCdf alpha = parse_alpha(cfg);
  std::uint64_t seed = choose_seed(cfg, fl);

  CascadeSpec spec;
  if (cfg.contains("oracle")) {
    const json& j = cfg["oracle"];
    expect_keys(j, "oracle", {"atoms", "replicas", "tail_target"});
    if (j.contains("atoms")) spec.atoms = j["atoms"].get<int>();
    if (j.contains("replicas")) spec.replicas = j["replicas"].get<int>();
    if (j.contains("tail_target")) spec.tail_target = j["tail_target"].get<double>();
  }
  MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
  spec.zeta.assign(pi.u.begin() + 1, pi.u.end() - 1);

  McEstimate est = mc_p_functional(xi, pi, spec, seed);
  double exact = p_functional(xi, pi);
  json out = {{"mean", est.mean},
              {"se", est.std_error},
              {"replicas", est.replicas},
              {"atoms", est.atoms},
              {"max_tail_mass", est.max_tail_mass},
              {"seed", est.seed},
              {"zeta", spec.zeta},
              {"deterministic", exact},
              {"deviation_se", est.std_error > 0.0
                                   ? std::abs(est.mean - exact) / est.std_error
                                   : 0.0}};

  if (pick_format(fl, "json") == "json") {
    emit(fl, out.dump(2));
  } else {
    std::ostringstream csv;
    csv << "key,value\n";
    for (const char* k : {"mean", "se", "deterministic", "deviation_se", "max_tail_mass"})
      csv << k << "," << out[k].get<double>() << "\n";
    csv << "replicas," << est.replicas << "\n";
    csv << "atoms," << est.atoms << "\n";
    csv << "seed," << est.seed << "\n";
    emit(fl, csv.str());
  }
  return 0;
}

int cmd_finite_n(const json& cfg, const CliFlags& fl) {
  MixtureXi xi = parse_model(cfg);
  std::uint64_t seed = choose_seed(cfg, fl);

  std::vector<int> sizes = {2, 4, 6, 8};
  int samples = 100;
  if (cfg.contains("finite_n")) {
    const json& j = cfg["finite_n"];
    expect_keys(j, "finite_n", {"N", "samples"});
    if (j.contains("N")) {
      if (j["N"].is_array()) sizes = j["N"].get<std::vector<int>>();
      else sizes = {j["N"].get<int>()};
    }
    if (j.contains("samples")) samples = j["samples"].get<int>();
  }

  std::vector<FreeEnergyEstimate> rows;
  rows.reserve(sizes.size());
  for (int n : sizes) rows.push_back(estimate_FN(xi, n, samples, seed));

  if (pick_format(fl, "csv") == "csv") {
    std::ostringstream csv;
    csv << "N,mean,se,samples,seed\n";
    for (const auto& r : rows)
      csv << r.N << "," << r.mean << "," << r.std_error << "," << r.samples << ","
          << r.seed << "\n";
    emit(fl, csv.str());
  } else {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"N", r.N},
                     {"mean", r.mean},
                     {"se", r.std_error},
                     {"samples", r.samples},
                     {"seed", r.seed}});
    emit(fl, arr.dump(2));
  }
  return 0;
}

double frobenius_exch(const ExchangeableMat& m) {
  return std::sqrt(double(m.D) * m.diag * m.diag +
                   double(m.D) * double(m.D - 1) * m.offdiag * m.offdiag);
}

// Random nondecreasing exchangeable path pair on shared breakpoints; both
// eigenvalue profiles sorted, so increments stay PSD.
void random_path_pair(int D, std::mt19937_64& rng, MatrixStepPath& a, MatrixStepPath& b) {
  const std::vector<double> u = {0.0, 0.35, 0.7, 1.0};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&]() {
    std::vector<ExchangeableMat> v;
    std::vector<double> lu(3), lp(3);
    for (auto& x : lu) x = unif(rng);
    for (auto& x : lp) x = unif(rng);
    std::sort(lu.begin(), lu.end());
    std::sort(lp.begin(), lp.end());
    std::vector<SymMatD> dense;
    for (int j = 0; j < 3; ++j)
      dense.push_back(exch_from_eigs(D, lu[std::size_t(j)], lp[std::size_t(j)]).dense());
    return dense;
  };
  a = make_matrix_step_path(D, u, draw());
  b = make_matrix_step_path(D, u, draw());
}

int cmd_verify(const json& cfg, const CliFlags& fl) {
  MixtureXi xi = parse_model(cfg);
  std::uint64_t seed = choose_seed(cfg, fl);

  struct Row {
    std::string name;
    bool asserted = true;
    bool pass = true;
    std::string detail;
  };
  std::vector<Row> rows;

  {
    ConvexityReport rep = check_convexity_sample(xi, 200, seed + 1);
    std::ostringstream d;
    d << "max violation " << rep.max_violation << " over " << rep.trials
      << " pairs (tol 1e-9)";
    rows.push_back({"convexity-sweep", true, rep.max_violation <= 1e-9, d.str()});
  }

  {
    // |psi(a) - psi(b)| <= sum_j |a_j - b_j|_F du_j, plus grid headroom.
    std::mt19937_64 rng(seed + 2);
    double worst = -1.0;
    bool ok = true;
    for (int trial = 0; trial < 3; ++trial) {
      MatrixStepPath a, b;
      random_path_pair(xi.D, rng, a, b);
      double lhs = std::abs(psi_of_path(a) - psi_of_path(b));
      double rhs = 0.0;
      std::vector<ExchangeableMat> ea, eb;
      a.exchangeable(&ea);
      b.exchangeable(&eb);
      for (std::size_t j = 0; j < ea.size(); ++j)
        rhs += frobenius_exch(exch_sub(ea[j], eb[j])) * (a.u[j + 1] - a.u[j]);
      worst = std::max(worst, lhs - rhs);
      if (lhs > rhs + 1e-4) ok = false;
    }
    std::ostringstream d;
    d << "worst slack " << worst << " over 3 pairs (margin 1e-4)";
    rows.push_back({"psi-lipschitz", true, ok, d.str()});
  }

  {
    Condition1Report rep = check_condition_1(xi);
    std::ostringstream d;
    bool pure2 = xi.betas.size() == 1 && !xi.betas.empty() && xi.betas[0].first == 2;
    if (rep.holds)
      d << "holds (min eig " << rep.min_eig << " at s=" << rep.argmin_s << ")";
    else if (pure2)
      d << "fails (λ_u=0)";
    else
      d << "fails (min eig " << rep.min_eig << " at s=" << rep.argmin_s << ")";
    rows.push_back({"condition-1", false, rep.holds, d.str()});
  }

  {
    StepCdf alpha = make_step_cdf({0.0, 0.5, 1.0}, {0.4, 0.9});
    GridSpec grid = GridSpec::defaults_for(xi);
    grid.points = xi.D == 2 ? 513 : 65;
    PdeSolution sol = solve_cole_hopf(xi, alpha, grid);
    std::vector<double> x(std::size_t(xi.D)), xs(std::size_t(xi.D));
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    const double shift = 0.7;
    for (int k = 0; k < xi.D; ++k) {
      x[std::size_t(k)] = unif(rng);
      xs[std::size_t(k)] = x[std::size_t(k)] + shift;
    }
    double drift = std::abs(sol.eval_full(0, xs) - sol.eval_full(0, x) - shift);
    std::ostringstream d;
    d << "uniform-shift drift " << drift << " (tol 1e-8)";
    rows.push_back({"translation", true, drift <= 1e-8, d.str()});
  }

  std::ostringstream table;
  bool suite_pass = true;
  for (const auto& r : rows) {
    std::string status = r.asserted ? (r.pass ? "pass" : "FAIL") : "info";
    if (r.asserted && !r.pass) suite_pass = false;
    table << r.name;
    for (std::size_t i = r.name.size(); i < 20; ++i) table << ' ';
    table << status;
    for (std::size_t i = status.size(); i < 6; ++i) table << ' ';
    table << r.detail << "\n";
  }
  table << "verify: " << (suite_pass ? "PASS" : "FAIL") << "\n";
  emit(fl, table.str());
  return suite_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potts spin glass variational toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  CliFlags fl;
  app.add_option("--config", fl.config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", fl.seed, "RNG seed (overrides config)");
  app.add_option("--grid-points", fl.grid_points, "grid nodes per axis override");
  app.add_option("--grid-extent", fl.grid_extent, "grid half-width override");
  app.add_option("--threads", fl.threads, "worker cap (evaluation is sequential)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", fl.out_path, "write output to this path instead of stdout");
  app.add_option("--format", fl.format, "json|csv");

  bool check_lemma_flag = false;
  CLI::App* c_eval = app.add_subcommand("evaluate", "evaluate f(alpha) with term breakdown");
  c_eval->add_flag("--check-lemma", check_lemma_flag,
                   "also evaluate the dual cascade form and report the discrepancy");
  CLI::App* c_min = app.add_subcommand("minimize", "minimize f over step order parameters");
  CLI::App* c_orc = app.add_subcommand("oracle", "Monte Carlo cascade estimate of the dual form");
  CLI::App* c_fin = app.add_subcommand("finite-n", "exact finite-size free energies");
  CLI::App* c_ver = app.add_subcommand("verify", "structural invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  fl.seed_set = seed_opt->count() > 0;

  try {
    json cfg = load_config(fl.config_path);
    if (c_eval->parsed()) return cmd_evaluate(cfg, fl, check_lemma_flag);
    if (c_min->parsed()) return cmd_minimize(cfg, fl);
    if (c_orc->parsed()) return cmd_oracle(cfg, fl);
    if (c_fin->parsed()) return cmd_finite_n(cfg, fl);
    if (c_ver->parsed()) return cmd_verify(cfg, fl);
    throw std::invalid_argument("no subcommand");
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
