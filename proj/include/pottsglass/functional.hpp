#pragma once

// The variational functional f over step order parameters, the cascade
// functional psi over increasing matrix paths, and the dual functional P.
// P is evaluated deterministically through the identity
//   P(pi) = -psi(q) + 1/2 int_0^1 theta(pi(s)) ds,  q = 1/2 grad_xi(pi),
// with both bookkeeping integrals computed exactly (polynomial or step sum);
// the only approximation anywhere is the shared grid recursion.

#include "pottsglass/model.hpp"
#include "pottsglass/paths.hpp"
#include "pottsglass/pde.hpp"

namespace pottsglass {

// int_0^1 alpha(s) Psi(s).mu_dot(s) ds, exactly: the integrand is a
// polynomial on each interval of alpha, integrated in closed form.
double correction_integral(const MixtureXi& xi, const StepCdf& alpha);

// Additive pieces of f: value = phi0 + theta_term - correction with
// theta_term = theta(Psi(1))/2 and correction = correction_integral/2.
struct FTerms {
  double phi0 = 0.0;
  double theta_term = 0.0;
  double correction = 0.0;
  double value = 0.0;
};

FTerms f_terms(const MixtureXi& xi, const StepCdf& alpha, const GridSpec& grid);
FTerms f_terms(const MixtureXi& xi, const StepCdf& alpha);

double f_functional(const MixtureXi& xi, const StepCdf& alpha, const GridSpec& grid);
double f_functional(const MixtureXi& xi, const StepCdf& alpha);

// psi(q) for an increasing matrix step path with r segments: backward
// recursion with clock M = 2q, exponents at the r-1 interior jump locations
// of q, terminal diagonal from M at 1, base field N(0, M at 0+); returns the
// negated base value. Exchangeable paths use the reduced engine; paths
// outside the exchangeable family are supported only for D = 2 (dense
// engine). Throws invalid_argument otherwise.
double psi_of_path(const MatrixStepPath& q, const GridSpec& grid);
double psi_of_path(const MatrixStepPath& q);

// P(pi) = -psi(1/2 grad_xi o pi) + 1/2 sum_j theta(pi_j) (u_j - u_{j-1}).
double p_functional(const MixtureXi& xi, const MatrixStepPath& pi, const GridSpec& grid);
double p_functional(const MixtureXi& xi, const MatrixStepPath& pi);

// Duality check f(alpha) = P(Psi o alpha^{-1}); both sides run the same
// recursion engine but with independently constructed level lists, so the
// discrepancy measures the height/location bookkeeping plus grid error.
struct LemmaCheck {
  double f_value = 0.0;
  double p_value = 0.0;
  double discrepancy = 0.0;
};

LemmaCheck check_lemma(const MixtureXi& xi, const StepCdf& alpha);
LemmaCheck check_lemma(const MixtureXi& xi, const StepCdf& alpha,
                       const GridSpec& f_grid, const GridSpec& psi_grid);

}  // namespace pottsglass
