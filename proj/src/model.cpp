#include "pottsglass/model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pottsglass {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

Eigen::MatrixXd to_eigen(const SymMatD& m) {
  Eigen::MatrixXd e(m.D, m.D);
  for (int k = 0; k < m.D; ++k)
    for (int l = 0; l < m.D; ++l) e(k, l) = m.at(k, l);
  return e;
}

}  // namespace

double SymMatD::dot(const SymMatD& o) const {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * o.a[i];
  return s;
}

SymMatD sym_add(const SymMatD& x, const SymMatD& y) {
  SymMatD r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

SymMatD sym_sub(const SymMatD& x, const SymMatD& y) {
  SymMatD r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  return r;
}

SymMatD sym_scale(const SymMatD& x, double s) {
  SymMatD r = x;
  for (auto& v : r.a) v *= s;
  return r;
}

double sym_min_eig(const SymMatD& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(x));
  return es.eigenvalues().minCoeff();
}

SymMatD ExchangeableMat::dense() const {
  SymMatD m(D);
  for (int k = 0; k < D; ++k)
    for (int l = 0; l < D; ++l) m.at(k, l) = (k == l) ? diag : offdiag;
  return m;
}

ExchangeableMat exch_add(const ExchangeableMat& x, const ExchangeableMat& y) {
  return {x.D, x.diag + y.diag, x.offdiag + y.offdiag};
}

ExchangeableMat exch_sub(const ExchangeableMat& x, const ExchangeableMat& y) {
  return {x.D, x.diag - y.diag, x.offdiag - y.offdiag};
}

ExchangeableMat exch_scale(const ExchangeableMat& x, double s) {
  return {x.D, x.diag * s, x.offdiag * s};
}

bool exch_from_dense(const SymMatD& m, ExchangeableMat& out, double tol) {
  const double d = m.at(0, 0);
  const double o = m.D > 1 ? m.at(0, 1) : 0.0;
  for (int k = 0; k < m.D; ++k)
    for (int l = 0; l < m.D; ++l) {
      const double want = (k == l) ? d : o;
      if (std::abs(m.at(k, l) - want) > tol) return false;
    }
  out = {m.D, d, o};
  return true;
}

PermEig perm_eig(const ExchangeableMat& m) {
  return {m.lambda_uniform(), m.lambda_perp()};
}

ExchangeableMat exch_from_eigs(int D, double lambda_uniform, double lambda_perp) {
  // diag + (D-1) offdiag = lu, diag - offdiag = lp.
  const double offdiag = (lambda_uniform - lambda_perp) / double(D);
  return {D, lambda_perp + offdiag, offdiag};
}

namespace {

double clamp_sqrt(double lambda) {
  if (lambda < -1e-12) throw std::invalid_argument("increment not PSD");
  return lambda > 0.0 ? std::sqrt(lambda) : 0.0;
}

}  // namespace

ExchangeableMat psd_sqrt(const ExchangeableMat& m) {
  return exch_from_eigs(m.D, clamp_sqrt(m.lambda_uniform()), clamp_sqrt(m.lambda_perp()));
}

SymMatD psd_sqrt(const SymMatD& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam(i) = clamp_sqrt(lam(i));
  Eigen::MatrixXd r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  SymMatD out(m.D);
  for (int k = 0; k < m.D; ++k)
    for (int l = 0; l < m.D; ++l) out.at(k, l) = 0.5 * (r(k, l) + r(l, k));
  return out;
}

ExchangeableMat psi_embed(int D, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("psi_embed: s outside [0,1]");
  const double dd = double(D);
  return {D, s / dd + (1.0 - s) / (dd * dd), (1.0 - s) / (dd * dd)};
}

MixtureXi MixtureXi::from_betas(int D, const std::map<int, double>& betas) {
  if (D < 2 || D > 4) throw std::invalid_argument("D must be in {2,3,4}");
  MixtureXi xi;
  xi.D = D;
  for (const auto& [p, b] : betas) {
    if (p < 2) throw std::invalid_argument("mixture exponents must satisfy p >= 2");
    if (b < 0.0) throw std::invalid_argument("mixture coefficients must be nonnegative");
    if (b > 0.0) xi.betas.emplace_back(p, b);
  }
  return xi;
}

double xi_eval(const MixtureXi& xi, const SymMatD& a) {
  double v = 0.0;
  for (const auto& [p, b] : xi.betas) {
    double s = 0.0;
    for (double e : a.a) s += ipow(e, p);
    v += b * b * s;
  }
  return v;
}

double xi_eval(const MixtureXi& xi, const ExchangeableMat& a) {
  const double D = xi.D;
  double v = 0.0;
  for (const auto& [p, b] : xi.betas)
    v += b * b * (D * ipow(a.diag, p) + D * (D - 1.0) * ipow(a.offdiag, p));
  return v;
}

SymMatD grad_xi(const MixtureXi& xi, const SymMatD& a) {
  SymMatD g(a.D);
  for (const auto& [p, b] : xi.betas)
    for (std::size_t i = 0; i < a.a.size(); ++i)
      g.a[i] += double(p) * b * b * ipow(a.a[i], p - 1);
  return g;
}

ExchangeableMat grad_xi(const MixtureXi& xi, const ExchangeableMat& a) {
  ExchangeableMat g{xi.D, 0.0, 0.0};
  for (const auto& [p, b] : xi.betas) {
    g.diag += double(p) * b * b * ipow(a.diag, p - 1);
    g.offdiag += double(p) * b * b * ipow(a.offdiag, p - 1);
  }
  return g;
}

double theta_eval(const MixtureXi& xi, const SymMatD& a) {
  return a.dot(grad_xi(xi, a)) - xi_eval(xi, a);
}

double theta_eval(const MixtureXi& xi, const ExchangeableMat& a) {
  const double D = xi.D;
  const ExchangeableMat g = grad_xi(xi, a);
  const double dot = D * a.diag * g.diag + D * (D - 1.0) * a.offdiag * g.offdiag;
  return dot - xi_eval(xi, a);
}

ExchangeableMat mu_eval(const MixtureXi& xi, double s) {
  return grad_xi(xi, psi_embed(xi.D, s));
}

ExchangeableMat mu_dot(const MixtureXi& xi, double s) {
  const ExchangeableMat psi = psi_embed(xi.D, s);
  const double dd = double(xi.D);
  const double dpsi_diag = (dd - 1.0) / (dd * dd);
  const double dpsi_off = -1.0 / (dd * dd);
  ExchangeableMat m{xi.D, 0.0, 0.0};
  for (const auto& [p, b] : xi.betas) {
    const double c = double(p) * double(p - 1) * b * b;
    m.diag += c * ipow(psi.diag, p - 2) * dpsi_diag;
    m.offdiag += c * ipow(psi.offdiag, p - 2) * dpsi_off;
  }
  return m;
}

Poly psi_diag_poly(int D) {
  const double dd = double(D);
  return Poly{{1.0 / (dd * dd), 1.0 / dd - 1.0 / (dd * dd)}};
}

Poly psi_offdiag_poly(int D) {
  const double dd = double(D);
  return Poly{{1.0 / (dd * dd), -1.0 / (dd * dd)}};
}

Poly mu_diag_poly(const MixtureXi& xi) {
  const Poly pd = psi_diag_poly(xi.D);
  Poly m;
  for (const auto& [p, b] : xi.betas)
    m = poly_add(m, poly_scale(poly_pow(pd, p - 1), double(p) * b * b));
  return m;
}

Poly mu_offdiag_poly(const MixtureXi& xi) {
  const Poly po = psi_offdiag_poly(xi.D);
  Poly m;
  for (const auto& [p, b] : xi.betas)
    m = poly_add(m, poly_scale(poly_pow(po, p - 1), double(p) * b * b));
  return m;
}

Condition1Report check_condition_1(const MixtureXi& xi, int grid_points) {
  const double dd = double(xi.D);
  Condition1Report rep;
  rep.min_eig = rep.min_lambda_uniform = rep.min_lambda_perp = 1e300;
  bool positive = !xi.zero();
  for (int i = 1; i <= grid_points; ++i) {
    const double s = double(i) / double(grid_points);
    const ExchangeableMat psi = psi_embed(xi.D, s);
    // Factored eigenvalues of mu_dot(s): the p=2 term cancels exactly in the
    // uniform direction, so the pure p=2 mixture reports min_lambda_uniform=0.
    double lu = 0.0, lp = 0.0;
    for (const auto& [p, b] : xi.betas) {
      const double c = double(p) * double(p - 1) * b * b / (dd * dd);
      lu += c * (dd - 1.0) * (ipow(psi.diag, p - 2) - ipow(psi.offdiag, p - 2));
      lp += c * ((dd - 1.0) * ipow(psi.diag, p - 2) + ipow(psi.offdiag, p - 2));
    }
    if (lu < rep.min_lambda_uniform) rep.min_lambda_uniform = lu;
    if (lp < rep.min_lambda_perp) rep.min_lambda_perp = lp;
    const double mn = std::min(lu, lp);
    if (mn < rep.min_eig) {
      rep.min_eig = mn;
      rep.argmin_s = s;
    }
    if (!(lu > 0.0) || !(lp > 0.0)) positive = false;
  }
  rep.holds = positive;
  if (xi.zero()) rep.min_eig = rep.min_lambda_uniform = rep.min_lambda_perp = 0.0;
  return rep;
}

ConvexityReport check_convexity_sample(const MixtureXi& xi, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int D = xi.D;

  auto draw_psd_nonneg = [&]() {
    // Sum of rank-one terms with nonnegative vectors: PSD, entrywise >= 0.
    SymMatD m(D);
    for (int r = 0; r < D; ++r) {
      std::vector<double> v(D);
      for (auto& x : v) x = std::abs(gauss(rng));
      const double w = unif(rng) / double(D);
      for (int k = 0; k < D; ++k)
        for (int l = 0; l < D; ++l) m.at(k, l) += w * v[k] * v[l];
    }
    return m;
  };

  ConvexityReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.max_violation = -1e300;
  for (int t = 0; t < trials; ++t) {
    const SymMatD a = draw_psd_nonneg();
    const SymMatD b = draw_psd_nonneg();
    const double lam = unif(rng);
    const SymMatD mid = sym_add(sym_scale(a, lam), sym_scale(b, 1.0 - lam));
    const double viol =
        xi_eval(xi, mid) - lam * xi_eval(xi, a) - (1.0 - lam) * xi_eval(xi, b);
    if (viol > rep.max_violation) rep.max_violation = viol;
  }
  return rep;
}

}  // namespace pottsglass
