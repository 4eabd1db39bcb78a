// End-to-end exercises of the command line binary via subprocesses. argv[1]
// is the binary path (wired by CMake); every case shells out and inspects
// exit status plus captured streams.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

std::string g_binary;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

RunResult run_cli(const std::string& args) {
  const std::string err_path = "/tmp/cli_stderr.txt";
  std::string cmd = g_binary + " " + args + " 2>" + err_path;
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
    res.out.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.err = slurp(err_path);
  return res;
}

std::string write_config(const json& cfg) {
  static int counter = 0;
  std::string path = "/tmp/cli_config_" + std::to_string(counter++) + ".json";
  spit(path, cfg.dump(2));
  return path;
}

json base_model() {
  return json{{"model", {{"D", 2}, {"betas", {{"2", 0.5}}}}}};
}

}  // namespace

TEST_CASE("evaluate zero mixture returns zero value") {
  json cfg = {{"model", {{"D", 2}, {"betas", json::object()}}},
              {"alpha", {{"t", {0.0, 1.0}}, {"m", {1.0}}}}};
  RunResult r = run_cli("--config " + write_config(cfg) + " evaluate");
  CHECK(r.exit_code == 0);
  json out = json::parse(r.out);
  CHECK(std::abs(out["value"].get<double>()) <= 1e-12);
  CHECK(out.contains("terms"));
  CHECK(out["terms"].contains("phi0"));
}

TEST_CASE("evaluate rejects non-monotone heights with exit 2") {
  json cfg = base_model();
  cfg["alpha"] = {{"t", {0.0, 0.5, 1.0}}, {"m", {0.9, 0.2}}};
  RunResult r = run_cli("--config " + write_config(cfg) + " evaluate");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("non-monotone heights") != std::string::npos);
}

TEST_CASE("evaluate rejects unknown config keys with exit 2") {
  json cfg = base_model();
  cfg["alpha"] = {{"t", {0.0, 1.0}}, {"m", {1.0}}, {"mm", {1.0}}};
  RunResult r = run_cli("--config " + write_config(cfg) + " evaluate");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("unknown key: alpha.mm") != std::string::npos);

  json cfg2 = base_model();
  cfg2["extra"] = 1;
  RunResult r2 = run_cli("--config " + write_config(cfg2) + " evaluate");
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("unknown key: config.extra") != std::string::npos);
}

TEST_CASE("unknown flag and missing config exit 2") {
  RunResult r = run_cli("--bogus evaluate");
  CHECK(r.exit_code == 2);
  RunResult r2 = run_cli("evaluate");
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("missing --config") != std::string::npos);
  RunResult r3 = run_cli("--config /tmp/does_not_exist_xyz.json evaluate");
  CHECK(r3.exit_code == 2);
}

TEST_CASE("check-lemma agrees on the shipped example config") {
  RunResult r = run_cli("--config " SHIPPED_CONFIG_DIR "/lemma_example.json evaluate --check-lemma");
  CHECK(r.exit_code == 0);
  json out = json::parse(r.out);
  CHECK(out["discrepancy"].get<double>() <= 5e-4);
  CHECK(std::abs(out["value"].get<double>() - out["p_value"].get<double>()) ==
        out["discrepancy"].get<double>());
}

TEST_CASE("minimize reports uniqueness and round-trips through evaluate") {
  json cfg = base_model();
  cfg["minimize"] = {{"k", 8}, {"starts", 2}};
  cfg["seed"] = 7;
  std::string path = write_config(cfg);
  RunResult r = run_cli("--config " + path + " minimize");
  CHECK(r.exit_code == 0);
  json out = json::parse(r.out);
  CHECK(out.contains("uniqueness"));
  CHECK(out["uniqueness"]["max_l1_spread"].get<double>() <= 1e-3);
  CHECK(out["uniqueness"]["values"].size() == 2);
  CHECK(out["trace"].size() == std::size_t(out["iterations"].get<int>()) + 1);

  // The emitted minimizer must be a valid alpha for evaluate, and the value
  // must match on the same grid.
  json cfg2 = base_model();
  cfg2["alpha"] = out["alpha_star"];
  cfg2["grid"] = out["grid"];
  RunResult r2 = run_cli("--config " + write_config(cfg2) + " evaluate");
  CHECK(r2.exit_code == 0);
  json out2 = json::parse(r2.out);
  CHECK(std::abs(out2["value"].get<double>() - out["value"].get<double>()) <= 1e-9);
}

TEST_CASE("minimize csv trace has the iteration header") {
  json cfg = base_model();
  cfg["minimize"] = {{"k", 4}, {"starts", 1}, {"max_iters", 200}};
  RunResult r = run_cli("--config " + write_config(cfg) + " --format csv minimize");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("iteration,value\n", 0) == 0);
  CHECK(r.out.find("0,") != std::string::npos);
}

TEST_CASE("oracle estimate brackets the deterministic value and is reproducible") {
  json cfg = {{"model", {{"D", 2}, {"betas", {{"2", 1.0}}}}},
              {"alpha", {{"t", {0.0, 0.5, 1.0}}, {"m", {0.4, 1.0}}}},
              {"oracle", {{"atoms", 2000}, {"replicas", 60}}},
              {"seed", 3}};
  std::string path = write_config(cfg);
  RunResult r = run_cli("--config " + path + " oracle");
  CHECK(r.exit_code == 0);
  json out = json::parse(r.out);
  double dev = std::abs(out["mean"].get<double>() - out["deterministic"].get<double>());
  CHECK(dev <= 4.0 * out["se"].get<double>());
  CHECK(out["zeta"].size() == 1);
  CHECK(out["zeta"][0].get<double>() == doctest::Approx(0.4).epsilon(1e-12));

  RunResult r2 = run_cli("--config " + path + " oracle");
  CHECK(r2.out == r.out);
}

TEST_CASE("finite-n emits the csv sweep") {
  json cfg = base_model();
  cfg["finite_n"] = {{"N", {2, 3}}, {"samples", 20}};
  cfg["seed"] = 11;
  RunResult r = run_cli("--config " + write_config(cfg) + " finite-n");
  CHECK(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "N,mean,se,samples,seed");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  CHECK(r.out.find("\n2,") != std::string::npos);
  CHECK(r.out.find("\n3,") != std::string::npos);
}

TEST_CASE("verify passes on a pure two-spin model and reports condition 1 as informational") {
  json cfg = {{"model", {{"D", 2}, {"betas", {{"2", 1.0}}}}}};
  RunResult r = run_cli("--config " + write_config(cfg) + " verify");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("convexity-sweep") != std::string::npos);
  CHECK(r.out.find("fails (λ_u=0)") != std::string::npos);
  CHECK(r.out.find("verify: PASS") != std::string::npos);
}

TEST_CASE("verify reports condition 1 holding for a mixed model") {
  json cfg = {{"model", {{"D", 2}, {"betas", {{"2", 1.0}, {"3", 0.5}}}}}};
  RunResult r = run_cli("--config " + write_config(cfg) + " verify");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("condition-1") != std::string::npos);
  CHECK(r.out.find("holds") != std::string::npos);
}

TEST_CASE("out flag writes the payload to a file") {
  json cfg = base_model();
  cfg["alpha"] = {{"t", {0.0, 1.0}}, {"m", {1.0}}};
  const std::string out_path = "/tmp/cli_out_payload.json";
  std::remove(out_path.c_str());
  RunResult r = run_cli("--config " + write_config(cfg) + " --out " + out_path + " evaluate");
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());
  json out = json::parse(slurp(out_path));
  CHECK(out.contains("value"));
}

TEST_CASE("seed flag overrides the config seed") {
  json cfg = base_model();
  cfg["finite_n"] = {{"N", 3}, {"samples", 10}};
  cfg["seed"] = 5;
  std::string path = write_config(cfg);
  RunResult a = run_cli("--config " + path + " finite-n");
  RunResult b = run_cli("--config " + path + " --seed 5 finite-n");
  RunResult c = run_cli("--config " + path + " --seed 6 finite-n");
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

int main(int argc, char** argv) {
  if (argc > 1) g_binary = argv[1];
  if (g_binary.empty()) {
    std::fprintf(stderr, "usage: test_cli <path-to-binary>\n");
    return 1;
  }
  doctest::Context ctx;
  return ctx.run();
}
