#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pottsglass/model.hpp"

using namespace pottsglass;

namespace {

// Oracle: xi by a literal triple loop over (p, k, l), no shared code path.
double xi_oracle(int D, const std::map<int, double>& betas, const SymMatD& a) {
  double v = 0.0;
  for (const auto& [p, b] : betas)
    for (int k = 0; k < D; ++k)
      for (int l = 0; l < D; ++l) v += b * b * std::pow(a.at(k, l), p);
  return v;
}

SymMatD random_psd(int D, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymMatD m(D);
  for (int r = 0; r < D; ++r) {
    std::vector<double> v(D);
    for (auto& x : v) x = g(rng);
    for (int k = 0; k < D; ++k)
      for (int l = 0; l < D; ++l) m.at(k, l) += v[k] * v[l] / double(D);
  }
  return m;
}

}  // namespace

TEST_CASE("xi_eval matches the naive loop and the frozen value") {
  MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}, {3, 1.0}});
  SymMatD ones(2, 1.0);
  // Four entries of 1 per power: 1*4 + 1*4.
  CHECK(xi_eval(xi, ones) == doctest::Approx(8.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    SymMatD a = random_psd(2, rng);
    CHECK(xi_eval(xi, a) ==
          doctest::Approx(xi_oracle(2, {{2, 1.0}, {3, 1.0}}, a)).epsilon(1e-12));
  }
  MixtureXi xi3 = MixtureXi::from_betas(3, {{2, 0.7}, {4, 0.3}});
  for (int t = 0; t < 50; ++t) {
    SymMatD a = random_psd(3, rng);
    CHECK(xi_eval(xi3, a) ==
          doctest::Approx(xi_oracle(3, {{2, 0.7}, {4, 0.3}}, a)).epsilon(1e-12));
  }
}

TEST_CASE("xi_eval exchangeable overload agrees with dense") {
  MixtureXi xi = MixtureXi::from_betas(3, {{2, 1.0}, {3, 0.5}});
  for (double s : {0.0, 0.25, 0.8, 1.0}) {
    ExchangeableMat e = psi_embed(3, s);
    CHECK(xi_eval(xi, e) == doctest::Approx(xi_eval(xi, e.dense())).epsilon(1e-14));
    CHECK(theta_eval(xi, e) == doctest::Approx(theta_eval(xi, e.dense())).epsilon(1e-14));
  }
}

TEST_CASE("grad_xi matches central finite differences") {
  MixtureXi xi = MixtureXi::from_betas(2, {{3, 1.0}});
  SymMatD id(2);
  id.at(0, 0) = id.at(1, 1) = 1.0;
  SymMatD g = grad_xi(xi, id);
  CHECK(g.at(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(g.at(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

  std::mt19937_64 rng(12);
  MixtureXi mix = MixtureXi::from_betas(3, {{2, 1.0}, {3, 0.5}, {4, 0.25}});
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    SymMatD a = random_psd(3, rng);
    SymMatD g2 = grad_xi(mix, a);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        SymMatD ap = a, am = a;
        ap.at(k, l) += h;
        am.at(k, l) -= h;
        const double fd = (xi_eval(mix, ap) - xi_eval(mix, am)) / (2.0 * h);
        CHECK(g2.at(k, l) == doctest::Approx(fd).epsilon(2e-7));
      }
  }
}

TEST_CASE("theta_eval frozen value and identity") {
  MixtureXi xi = MixtureXi::from_betas(2, {{2, 1.0}, {3, 1.0}});
  // a = psi_embed(1) = Id/2: xi = 3/4, a.grad = 7/4.
  CHECK(theta_eval(xi, psi_embed(2, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    SymMatD a = random_psd(2, rng);
    const double direct = a.dot(grad_xi(xi, a)) - xi_eval(xi, a);
    CHECK(theta_eval(xi, a) == doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("psi_embed eigenvalues and round trip") {
  for (int D : {2, 3, 4}) {
    for (double s : {0.0, 0.1, 0.5, 0.77, 1.0}) {
      ExchangeableMat e = psi_embed(D, s);
      PermEig pe = perm_eig(e);
      CHECK(pe.lambda_uniform == doctest::Approx(1.0 / D).epsilon(1e-15));
      CHECK(pe.lambda_perp == doctest::Approx(s / D).epsilon(1e-15));
      // Round trip: D * lambda_perp recovers s.
      CHECK(std::abs(pe.lambda_perp * D - s) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(psi_embed(2, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(psi_embed(2, 1.01), std::invalid_argument);
}

TEST_CASE("perm_eig matches a dense eigensolver") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int D : {2, 3, 4}) {
    for (int t = 0; t < 30; ++t) {
      ExchangeableMat e{D, u(rng) + 2.0, u(rng)};
      SymMatD d = e.dense();
      Eigen::MatrixXd em(D, D);
      for (int k = 0; k < D; ++k)
        for (int l = 0; l < D; ++l) em(k, l) = d.at(k, l);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em);
      PermEig pe = perm_eig(e);
      // Dense spectrum is lambda_perp (D-1 times) then lambda_uniform or the
      // reverse depending on order; compare sorted multisets.
      std::vector<double> got{pe.lambda_uniform};
      for (int i = 0; i < D - 1; ++i) got.push_back(pe.lambda_perp);
      std::sort(got.begin(), got.end());
      for (int i = 0; i < D; ++i)
        CHECK(got[std::size_t(i)] == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("psd_sqrt squares back and clamps") {
  // psi_embed(1) - psi_embed(0) has eigenvalues (0, 1/2) at D=2.
  ExchangeableMat inc = exch_sub(psi_embed(2, 1.0), psi_embed(2, 0.0));
  ExchangeableMat r = psd_sqrt(inc);
  CHECK(perm_eig(r).lambda_uniform == doctest::Approx(0.0));
  CHECK(perm_eig(r).lambda_perp == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  // Dense route against an Eigen-based square root oracle.
  std::mt19937_64 rng(15);
  for (int t = 0; t < 20; ++t) {
    SymMatD a = random_psd(3, rng);
    SymMatD s = psd_sqrt(a);
    Eigen::MatrixXd es(3, 3);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) es(k, l) = s.at(k, l);
    Eigen::MatrixXd sq = es * es;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        CHECK(sq(k, l) == doctest::Approx(a.at(k, l)).epsilon(1e-10));
  }

  // Tiny negative eigenvalues clamp, genuinely negative ones throw.
  ExchangeableMat tiny{2, 0.5, 0.5 + 5e-13};
  CHECK(perm_eig(psd_sqrt(tiny)).lambda_perp == 0.0);
  ExchangeableMat bad{2, 0.0, 0.5};
  CHECK_THROWS_WITH_AS(psd_sqrt(bad), "increment not PSD", std::invalid_argument);
}

TEST_CASE("mu_eval is 2 beta^2 psi for the pure p=2 mixture") {
  for (double beta : {0.3, 1.0, 2.0}) {
    MixtureXi xi = MixtureXi::from_betas(2, {{2, beta}});
    for (double s : {0.0, 0.4, 1.0}) {
      ExchangeableMat m = mu_eval(xi, s);
      ExchangeableMat want = exch_scale(psi_embed(2, s), 2.0 * beta * beta);
      CHECK(m.diag == doctest::Approx(want.diag).epsilon(1e-15));
      CHECK(m.offdiag == doctest::Approx(want.offdiag).epsilon(1e-15));
    }
  }
}

TEST_CASE("mu is increasing in the PSD order") {
  MixtureXi xi = MixtureXi::from_betas(3, {{2, 1.0}, {3, 0.5}});
  for (int i = 0; i < 10; ++i) {
    const double s0 = i / 10.0, s1 = (i + 1) / 10.0;
    ExchangeableMat d = exch_sub(mu_eval(xi, s1), mu_eval(xi, s0));
    CHECK(perm_eig(d).lambda_uniform >= -1e-12);
    CHECK(perm_eig(d).lambda_perp >= -1e-12);
  }
}

TEST_CASE("mu_dot matches finite differences of mu_eval and frozen values") {
  MixtureXi xi = MixtureXi::from_betas(2, {{3, 1.0}});
  ExchangeableMat md = mu_dot(xi, 0.5);
  CHECK(md.diag == doctest::Approx(9.0 / 16.0).epsilon(1e-15));
  CHECK(md.offdiag == doctest::Approx(-3.0 / 16.0).epsilon(1e-15));

  MixtureXi mix = MixtureXi::from_betas(3, {{2, 1.0}, {3, 0.5}, {4, 0.25}});
  const double h = 1e-6;
  for (double s : {0.1, 0.3, 0.5, 0.9}) {
    ExchangeableMat fd = exch_scale(exch_sub(mu_eval(mix, s + h), mu_eval(mix, s - h)),
                                    1.0 / (2.0 * h));
    ExchangeableMat an = mu_dot(mix, s);
    CHECK(an.diag == doctest::Approx(fd.diag).epsilon(1e-8));
    CHECK(an.offdiag == doctest::Approx(fd.offdiag).epsilon(1e-8));
  }
}

TEST_CASE("mu polynomials reproduce mu_eval") {
  MixtureXi xi = MixtureXi::from_betas(4, {{2, 0.8}, {3, 0.4}, {5, 0.2}});
  Poly pd = mu_diag_poly(xi), po = mu_offdiag_poly(xi);
  for (double s : {0.0, 0.2, 0.6, 1.0}) {
    ExchangeableMat m = mu_eval(xi, s);
    CHECK(pd.eval(s) == doctest::Approx(m.diag).epsilon(1e-14));
    CHECK(po.eval(s) == doctest::Approx(m.offdiag).epsilon(1e-14));
  }
}

TEST_CASE("check_condition_1 classifies mixtures") {
  // Pure p=2: the uniform eigenvalue of mu_dot vanishes identically (exact).
  Condition1Report r2 = check_condition_1(MixtureXi::from_betas(2, {{2, 1.0}}));
  CHECK_FALSE(r2.holds);
  CHECK(r2.min_lambda_uniform == 0.0);
  CHECK(r2.min_lambda_perp > 0.0);

  // Any p >= 3 weight makes mu_dot positive definite away from s=0.
  Condition1Report r3 = check_condition_1(MixtureXi::from_betas(2, {{3, 1.0}}));
  CHECK(r3.holds);
  CHECK(r3.min_lambda_uniform > 0.0);

  Condition1Report rmix = check_condition_1(MixtureXi::from_betas(3, {{2, 1.0}, {3, 0.5}}));
  CHECK(rmix.holds);

  Condition1Report rz = check_condition_1(MixtureXi::from_betas(2, {}));
  CHECK_FALSE(rz.holds);
}

TEST_CASE("check_convexity_sample finds no violations on the nonnegative cone") {
  ConvexityReport rep =
      check_convexity_sample(MixtureXi::from_betas(3, {{2, 1.0}, {3, 1.0}}), 10000, 42);
  CHECK(rep.max_violation <= 1e-10);
  ConvexityReport rep2 = check_convexity_sample(MixtureXi::from_betas(2, {{2, 1.0}}), 10000, 43);
  CHECK(rep2.max_violation <= 1e-10);
}

TEST_CASE("from_betas validates input") {
  CHECK_THROWS_AS(MixtureXi::from_betas(5, {{2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureXi::from_betas(2, {{1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MixtureXi::from_betas(2, {{2, -1.0}}), std::invalid_argument);
  CHECK(MixtureXi::from_betas(2, {{2, 0.0}}).zero());
}
