#pragma once

// Mixture interaction for the D-state Potts spin glass and the matrix algebra
// used everywhere else: permutation-symmetric (exchangeable) covariance
// matrices, the exchangeable embedding of [0,1], and the induced clock mu.

#include <cstdint>
#include <map>
#include <vector>

#include "pottsglass/poly.hpp"

namespace pottsglass {

// Dense D x D symmetric matrix, row-major.
struct SymMatD {
  int D = 0;
  std::vector<double> a;

  SymMatD() = default;
  explicit SymMatD(int D_, double fill = 0.0) : D(D_), a(std::size_t(D_) * D_, fill) {}

  double& at(int k, int l) { return a[std::size_t(k) * D + l]; }
  double at(int k, int l) const { return a[std::size_t(k) * D + l]; }

  // Frobenius inner product.
  double dot(const SymMatD& o) const;
};

SymMatD sym_add(const SymMatD& x, const SymMatD& y);
SymMatD sym_sub(const SymMatD& x, const SymMatD& y);
SymMatD sym_scale(const SymMatD& x, double s);
// Smallest eigenvalue (dense symmetric solve).
double sym_min_eig(const SymMatD& x);

// diag*Id + offdiag*(ones - Id); closed under the algebra used here.
// Eigenvalues: diag + (D-1)*offdiag on the uniform vector, diag - offdiag
// with multiplicity D-1 on its orthogonal complement.
struct ExchangeableMat {
  int D = 0;
  double diag = 0.0;
  double offdiag = 0.0;

  ExchangeableMat() = default;
  ExchangeableMat(int D_, double d, double o) : D(D_), diag(d), offdiag(o) {}

  double lambda_uniform() const { return diag + double(D - 1) * offdiag; }
  double lambda_perp() const { return diag - offdiag; }
  SymMatD dense() const;
};

ExchangeableMat exch_add(const ExchangeableMat& x, const ExchangeableMat& y);
ExchangeableMat exch_sub(const ExchangeableMat& x, const ExchangeableMat& y);
ExchangeableMat exch_scale(const ExchangeableMat& x, double s);
// Inverse of ExchangeableMat::dense for matrices that are exactly exchangeable
// (all diagonal entries equal, all off-diagonal entries equal, tolerance tol).
bool exch_from_dense(const SymMatD& m, ExchangeableMat& out, double tol = 1e-12);

struct PermEig {
  double lambda_uniform = 0.0;
  double lambda_perp = 0.0;
};

PermEig perm_eig(const ExchangeableMat& m);
ExchangeableMat exch_from_eigs(int D, double lambda_uniform, double lambda_perp);

// Matrix square root on the PSD cone. Eigenvalues in [-1e-12, 0) are clamped
// to zero; anything lower throws "increment not PSD".
ExchangeableMat psd_sqrt(const ExchangeableMat& m);
SymMatD psd_sqrt(const SymMatD& m);

// Exchangeable embedding of [0,1]: (s/D) Id + ((1-s)/D^2) ones.
// Uniform eigenvalue 1/D for every s, perp eigenvalue s/D.
ExchangeableMat psi_embed(int D, double s);

// xi(a) = sum_p beta_p^2 sum_{k,l} a_{kl}^p.  Coefficients store beta_p (not
// squared), p >= 2, finitely many, all nonnegative.  D in {2,3,4}.
struct MixtureXi {
  int D = 0;
  std::vector<std::pair<int, double>> betas;  // (p, beta_p), sorted by p

  static MixtureXi from_betas(int D, const std::map<int, double>& betas);
  bool zero() const { return betas.empty(); }
  int max_p() const { return betas.empty() ? 0 : betas.back().first; }
};

double xi_eval(const MixtureXi& xi, const SymMatD& a);
double xi_eval(const MixtureXi& xi, const ExchangeableMat& a);
SymMatD grad_xi(const MixtureXi& xi, const SymMatD& a);
ExchangeableMat grad_xi(const MixtureXi& xi, const ExchangeableMat& a);
// theta(a) = a . grad_xi(a) - xi(a).
double theta_eval(const MixtureXi& xi, const SymMatD& a);
double theta_eval(const MixtureXi& xi, const ExchangeableMat& a);

// mu(s) = grad_xi(psi_embed(s)); mu_dot is its exact s-derivative.
ExchangeableMat mu_eval(const MixtureXi& xi, double s);
ExchangeableMat mu_dot(const MixtureXi& xi, double s);

// Entrywise polynomials in s for psi_embed and mu; used for exact integrals.
Poly psi_diag_poly(int D);
Poly psi_offdiag_poly(int D);
Poly mu_diag_poly(const MixtureXi& xi);
Poly mu_offdiag_poly(const MixtureXi& xi);

// Positive definiteness of mu_dot(s) away from s=0.  Scans a grid on (0,1];
// the uniform eigenvalue is computed in a factored form that is exactly zero
// for the pure p=2 mixture.
struct Condition1Report {
  bool holds = false;
  double min_eig = 0.0;
  double argmin_s = 0.0;
  double min_lambda_uniform = 0.0;
  double min_lambda_perp = 0.0;
};

Condition1Report check_condition_1(const MixtureXi& xi, int grid_points = 1000);

// Midpoint-convexity probe of xi on random PSD pairs with nonnegative
// entries (the cone containing every overlap matrix; entrywise p-th powers
// are convex there for all p >= 2, which is false on the full PSD cone when
// an odd p carries weight).
struct ConvexityReport {
  double max_violation = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

ConvexityReport check_convexity_sample(const MixtureXi& xi, int trials, std::uint64_t seed);

}  // namespace pottsglass
