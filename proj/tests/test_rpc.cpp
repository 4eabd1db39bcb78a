#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pottsglass/functional.hpp"
#include "pottsglass/model.hpp"
#include "pottsglass/paths.hpp"
#include "pottsglass/rpc.hpp"

using namespace pottsglass;

namespace {

MatrixStepPath constant_path(int D, const SymMatD& v) {
  return make_matrix_step_path(D, {0.0, 1.0}, {v});
}

// Half the clock path for the pure two-spin mixture at D=2, mu(s)/2.
SymMatD half_mu(const MixtureXi& xi, double s) {
  return sym_scale(mu_eval(xi, s).dense(), 0.5);
}

double leaf_weight_sum(const CascadeNode& node) {
  if (node.children.empty()) return 1.0;
  double total = 0.0;
  for (const CascadeNode& c : node.children)
    total += c.weight * leaf_weight_sum(c);
  return total;
}

}  // namespace

TEST_CASE("cascade spec validation rejects bad parameters") {
  std::mt19937_64 rng(1);
  auto bad = [&](CascadeSpec spec) {
    CHECK_THROWS_WITH_AS(sample_cascade(spec, rng), "cascade spec invalid",
                         std::invalid_argument);
  };
  CascadeSpec spec;
  spec.zeta = {0.5, 0.3};
  bad(spec);
  spec.zeta = {0.0, 0.5};
  bad(spec);
  spec.zeta = {0.5, 1.0};
  bad(spec);
  spec.zeta = {0.5};
  spec.atoms = 50;
  bad(spec);
  spec.atoms = 1000;
  spec.replicas = 0;
  bad(spec);
}

TEST_CASE("atom weights arrive largest first and sum to one") {
  std::mt19937_64 rng(42);
  CascadeSpec one;
  one.zeta = {0.5};
  CascadeTree tree = sample_cascade(one, rng);
  REQUIRE(tree.root.children.size() >= 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < tree.root.children.size(); ++i) {
    double w = tree.root.children[i].weight;
    CHECK(w > 0.0);
    if (i > 0) CHECK(w <= tree.root.children[i - 1].weight);
    sum += w;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  // The atom cap binds at this exponent; the truncated mass stays small.
  CHECK(tree.max_tail_mass <= 2e-4);

  // At a lower exponent the adaptive count stops well under the cap, so the
  // tail target itself is respected.
  CascadeSpec low;
  low.zeta = {0.3};
  CascadeTree shallow = sample_cascade(low, rng);
  CHECK(int(shallow.root.children.size()) < low.atoms);
  CHECK(shallow.max_tail_mass <= low.tail_target);

  CascadeSpec two;
  two.zeta = {0.3, 0.6};
  CascadeTree deep = sample_cascade(two, rng);
  CHECK(std::abs(leaf_weight_sum(deep.root) - 1.0) <= 1e-10);
  CHECK(deep.max_tail_mass <= 0.01);
}

TEST_CASE("low zeta concentrates the largest weight") {
  CascadeSpec spec;
  spec.zeta = {0.02};
  int hits = 0;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(1000 + s);
    CascadeTree tree = sample_cascade(spec, rng);
    if (tree.root.children.front().weight > 0.9) ++hits;
  }
  CHECK(hits >= 90);
}

TEST_CASE("high zeta spreads mass across many atoms") {
  CascadeSpec spec;
  spec.zeta = {0.95};
  std::vector<double> eff;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(2000 + s);
    CascadeTree tree = sample_cascade(spec, rng);
    double sq = 0.0;
    for (const CascadeNode& c : tree.root.children) sq += c.weight * c.weight;
    eff.push_back(1.0 / sq);
  }
  std::sort(eff.begin(), eff.end());
  // Heavy-tailed realizations keep a fixed per-seed threshold from holding
  // with high probability, so assert the median and a low floor instead.
  CHECK(eff[50] > 10.0);
  CHECK(eff[10] > 2.5);
}

TEST_CASE("mc_psi is exact on the zero path") {
  CascadeSpec spec;
  spec.replicas = 50;
  McEstimate est = mc_psi(constant_path(2, SymMatD(2, 0.0)), spec, 7);
  CHECK(std::abs(est.mean) <= 1e-12);
  CHECK(est.std_error <= 1e-12);
  CHECK(est.replicas == 50);
  CHECK(est.atoms == spec.atoms);
  CHECK(est.seed == 7);
}

TEST_CASE("mc_psi rejects paths whose jumps differ from the cascade levels") {
  MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}});
  MatrixStepPath q =
      make_matrix_step_path(2, {0.0, 0.4, 1.0}, {half_mu(xi, 0.3), half_mu(xi, 0.8)});
  CascadeSpec spec;
  spec.zeta = {0.5};
  CHECK_THROWS_WITH_AS(mc_psi(q, spec, 1), "location mismatch", std::invalid_argument);
  spec.zeta = {0.3, 0.6};
  CHECK_THROWS_WITH_AS(mc_psi(q, spec, 1), "location mismatch", std::invalid_argument);
}

TEST_CASE("mc_psi matches the deterministic value on constant paths") {
  SymMatD q0 = exch_from_eigs(2, 0.8, 0.4).dense();
  double ref = psi_of_path(constant_path(2, q0));

  CascadeSpec flat;
  flat.replicas = 400;
  McEstimate est = mc_psi(constant_path(2, q0), flat, 11);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.mean - ref) <= 3.0 * est.std_error);

  // Degenerate branching: a redundant jump with zero increment must not
  // move the estimate beyond its own noise.
  CascadeSpec degenerate;
  degenerate.zeta = {0.5};
  degenerate.replicas = 400;
  // Built by hand: canonicalization would merge the redundant jump away.
  MatrixStepPath padded;
  padded.D = 2;
  padded.u = {0.0, 0.5, 1.0};
  padded.v = {q0, q0};
  McEstimate est2 = mc_psi(padded, degenerate, 11);
  CHECK(std::abs(est2.mean - ref) <= 3.0 * est2.std_error);
}

TEST_CASE("mc_psi agrees with the recursion engine across levels") {
  SUBCASE("two branchings, two states") {
    MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}});
    MatrixStepPath q = make_matrix_step_path(
        2, {0.0, 0.2, 0.55, 1.0},
        {half_mu(xi, 0.3), half_mu(xi, 0.6), half_mu(xi, 0.9)});
    CascadeSpec spec;
    spec.zeta = {0.2, 0.55};
    spec.replicas = 200;
    McEstimate est = mc_psi(q, spec, 31);
    double ref = psi_of_path(q);
    CAPTURE(est.mean);
    CAPTURE(est.std_error);
    CAPTURE(ref);
    CHECK(std::abs(est.mean - ref) <= 3.0 * est.std_error);
  }
  SUBCASE("one branching, three states") {
    MixtureXi xi = MixtureXi::from_betas(3, {{2, 1.0}});
    MatrixStepPath q = make_matrix_step_path(
        3, {0.0, 0.35, 1.0},
        {sym_scale(mu_eval(xi, 0.3).dense(), 0.5),
         sym_scale(mu_eval(xi, 0.8).dense(), 0.5)});
    CascadeSpec spec;
    spec.zeta = {0.35};
    spec.replicas = 200;
    McEstimate est = mc_psi(q, spec, 32);
    CHECK(std::abs(est.mean - psi_of_path(q)) <= 3.0 * est.std_error);
  }
  SUBCASE("one branching, dense two state path") {
    SymMatD v0(2), d(2);
    v0.at(0, 0) = 0.3;
    v0.at(0, 1) = v0.at(1, 0) = 0.05;
    v0.at(1, 1) = 0.2;
    d.at(0, 0) = 0.3;
    d.at(0, 1) = d.at(1, 0) = 0.1;
    d.at(1, 1) = 0.25;
    MatrixStepPath q = make_matrix_step_path(2, {0.0, 0.45, 1.0}, {v0, sym_add(v0, d)});
    CascadeSpec spec;
    spec.zeta = {0.45};
    spec.replicas = 200;
    McEstimate est = mc_psi(q, spec, 33);
    CHECK(std::abs(est.mean - psi_of_path(q)) <= 3.0 * est.std_error);
  }
}

TEST_CASE("mc_p matches the deterministic functional") {
  SUBCASE("zero mixture") {
    MixtureXi xi = MixtureXi::from_betas(2, {});
    StepQuantile z;
    z.u = {0.0, 0.3, 1.0};
    z.z = {0.4, 0.9};
    MatrixStepPath pi = compose_psi(z, 2);
    CascadeSpec spec;
    spec.zeta = {0.3};
    spec.replicas = 50;
    McEstimate est = mc_p_functional(xi, pi, spec, 3);
    CHECK(std::abs(est.mean) <= 1e-12);
    CHECK(est.std_error <= 1e-12);
  }
  SUBCASE("two level path") {
    MixtureXi xi = MixtureXi::from_betas(2, {{2, 0.8}});
    StepQuantile z;
    z.u = {0.0, 0.25, 1.0};
    z.z = {0.35, 0.8};
    MatrixStepPath pi = compose_psi(z, 2);
    CascadeSpec spec;
    spec.zeta = {0.25};
    spec.replicas = 200;
    McEstimate est = mc_p_functional(xi, pi, spec, 101);
    double ref = p_functional(xi, pi);
    CAPTURE(est.mean);
    CAPTURE(est.std_error);
    CHECK(std::abs(est.mean - ref) <= 3.0 * est.std_error);
  }
  SUBCASE("end to end against f") {
    MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}});
    StepCdf alpha = make_step_cdf({0.0, 0.45, 1.0}, {0.25, 0.6});
    MatrixStepPath pi = compose_psi(quantile_inverse(alpha), 2);
    CascadeSpec spec;
    spec.zeta = {0.25, 0.6};
    spec.replicas = 100;
    McEstimate est = mc_p_functional(xi, pi, spec, 55);
    double f = f_functional(xi, alpha);
    CAPTURE(est.mean);
    CAPTURE(est.std_error);
    CAPTURE(f);
    CHECK(std::abs(est.mean - f) <= 3.0 * est.std_error + 5e-4);
  }
}

TEST_CASE("doubling the atom cap moves the mean less than one standard error") {
  // Per-node keyed streams couple the two runs: the smaller cap's atoms are
  // a prefix of the larger's, so the difference isolates truncation bias.
  MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}});
  MatrixStepPath q =
      make_matrix_step_path(2, {0.0, 0.5, 1.0}, {half_mu(xi, 0.3), half_mu(xi, 0.8)});
  CascadeSpec spec;
  spec.zeta = {0.5};
  spec.replicas = 200;
  spec.atoms = 2000;
  McEstimate coarse = mc_psi(q, spec, 77);
  spec.atoms = 4000;
  McEstimate fine = mc_psi(q, spec, 77);
  CAPTURE(coarse.mean);
  CAPTURE(fine.mean);
  CHECK(std::abs(coarse.mean - fine.mean) < std::max(coarse.std_error, fine.std_error));
  CHECK(fine.max_tail_mass < coarse.max_tail_mass);
}

TEST_CASE("standard error halves when replicas quadruple") {
  SymMatD q0 = exch_from_eigs(2, 0.7, 0.3).dense();
  CascadeSpec spec;
  spec.replicas = 100;
  McEstimate small = mc_psi(constant_path(2, q0), spec, 13);
  spec.replicas = 400;
  McEstimate big = mc_psi(constant_path(2, q0), spec, 13);
  double ratio = small.std_error / big.std_error;
  CHECK(ratio >= 1.4);
  CHECK(ratio <= 2.6);
}

TEST_CASE("identical seeds reproduce estimates bit for bit") {
  MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}});
  MatrixStepPath q =
      make_matrix_step_path(2, {0.0, 0.4, 1.0}, {half_mu(xi, 0.3), half_mu(xi, 0.8)});
  CascadeSpec spec;
  spec.zeta = {0.4};
  spec.replicas = 60;
  McEstimate a = mc_psi(q, spec, 12345);
  McEstimate b = mc_psi(q, spec, 12345);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.max_tail_mass == b.max_tail_mass);
  McEstimate c = mc_psi(q, spec, 54321);
  CHECK(a.mean != c.mean);
}
