#include "pottsglass/functional.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pottsglass {

namespace {

double sym_max_eig(const SymMatD& m) { return -sym_min_eig(sym_scale(m, -1.0)); }

double clamp_nonneg(double x) { return x > 0.0 ? x : 0.0; }

// Cascade level list for the reduced engine: level k carries the k+1-th jump
// location as exponent and the matching clock increment M_{k+2} - M_{k+1}.
std::vector<PdeLevel> cascade_levels(const std::vector<double>& u,
                                     const std::vector<ExchangeableMat>& M) {
  std::vector<PdeLevel> levels(M.size() - 1);
  for (std::size_t k = 0; k + 1 < M.size(); ++k) {
    levels[k].m = u[k + 1];
    levels[k].delta = exch_sub(M[k + 1], M[k]);
  }
  return levels;
}

double psi_reduced(int D, const std::vector<double>& u,
                   const std::vector<ExchangeableMat>& M, const GridSpec& grid) {
  PdeSolution sol =
      solve_backward_recursion(D, M.back().diag, cascade_levels(u, M), grid);
  return -eval_base_expectation(sol, M.front());
}

double psi_dense_2d(const std::vector<double>& u, const std::vector<SymMatD>& M,
                    const GridSpec& grid) {
  std::vector<DenseLevel> levels(M.size() - 1);
  for (std::size_t k = 0; k + 1 < M.size(); ++k) {
    levels[k].m = u[k + 1];
    levels[k].delta = sym_sub(M[k + 1], M[k]);
  }
  Dense2dSolution sol =
      solve_dense_2d(M.back().at(0, 0), M.back().at(1, 1), levels, grid);
  return -eval_dense_base(sol, M.front());
}

GridSpec default_psi_grid(const MatrixStepPath& q) {
  std::vector<ExchangeableMat> ex;
  if (q.exchangeable(&ex)) {
    double terminal = clamp_nonneg(2.0 * ex.back().lambda_perp());
    double base = clamp_nonneg(2.0 * ex.front().lambda_perp());
    return GridSpec::defaults_for_levels(q.D - 1, terminal, base);
  }
  double terminal = clamp_nonneg(sym_max_eig(sym_scale(q.v.back(), 2.0)));
  double base = clamp_nonneg(sym_max_eig(sym_scale(q.v.front(), 2.0)));
  GridSpec grid;
  grid.points = 321;
  grid.extent = std::max(8.0 * std::sqrt(terminal + 1.0),
                         9.5 * std::sqrt(base) + 0.5);
  return grid;
}

MatrixStepPath half_grad_xi_path(const MixtureXi& xi, const MatrixStepPath& pi) {
  std::vector<SymMatD> qv(pi.v.size());
  for (std::size_t j = 0; j < pi.v.size(); ++j)
    qv[j] = sym_scale(grad_xi(xi, pi.v[j]), 0.5);
  return make_matrix_step_path(pi.D, pi.u, qv);
}

}  // namespace

double correction_integral(const MixtureXi& xi, const StepCdf& alpha) {
  if (xi.zero()) return 0.0;
  int D = xi.D;
  Poly dens = poly_add(
      poly_scale(poly_mul(psi_diag_poly(D), mu_diag_poly(xi).derivative()),
                 double(D)),
      poly_scale(poly_mul(psi_offdiag_poly(D), mu_offdiag_poly(xi).derivative()),
                 double(D) * double(D - 1)));
  Poly anti = dens.antiderivative();
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.m.size(); ++i)
    total += alpha.m[i] * (anti.eval(alpha.t[i + 1]) - anti.eval(alpha.t[i]));
  return total;
}

FTerms f_terms(const MixtureXi& xi, const StepCdf& alpha, const GridSpec& grid) {
  FTerms out;
  PdeSolution sol = solve_cole_hopf(xi, alpha, grid);
  out.phi0 = eval_phi0_expectation(sol, xi);
  out.theta_term = 0.5 * theta_eval(xi, psi_embed(xi.D, 1.0));
  out.correction = 0.5 * correction_integral(xi, alpha);
  out.value = out.phi0 + out.theta_term - out.correction;
  return out;
}

FTerms f_terms(const MixtureXi& xi, const StepCdf& alpha) {
  return f_terms(xi, alpha, GridSpec::defaults_for(xi));
}

double f_functional(const MixtureXi& xi, const StepCdf& alpha, const GridSpec& grid) {
  return f_terms(xi, alpha, grid).value;
}

double f_functional(const MixtureXi& xi, const StepCdf& alpha) {
  return f_terms(xi, alpha).value;
}

double psi_of_path(const MatrixStepPath& q, const GridSpec& grid) {
  if (q.segments() < 1) throw std::invalid_argument("path must have at least one segment");
  std::vector<ExchangeableMat> ex;
  if (q.exchangeable(&ex)) {
    std::vector<ExchangeableMat> M(ex.size());
    for (std::size_t j = 0; j < ex.size(); ++j) M[j] = exch_scale(ex[j], 2.0);
    return psi_reduced(q.D, q.u, M, grid);
  }
  if (q.D != 2)
    throw std::invalid_argument("non-exchangeable paths supported only for D=2");
  std::vector<SymMatD> M(q.v.size());
  for (std::size_t j = 0; j < q.v.size(); ++j) M[j] = sym_scale(q.v[j], 2.0);
  return psi_dense_2d(q.u, M, grid);
}

double psi_of_path(const MatrixStepPath& q) {
  if (q.segments() < 1) throw std::invalid_argument("path must have at least one segment");
  return psi_of_path(q, default_psi_grid(q));
}

double p_functional(const MixtureXi& xi, const MatrixStepPath& pi, const GridSpec& grid) {
  double theta_int = 0.0;
  for (std::size_t j = 0; j < pi.v.size(); ++j)
    theta_int += theta_eval(xi, pi.v[j]) * (pi.u[j + 1] - pi.u[j]);
  return -psi_of_path(half_grad_xi_path(xi, pi), grid) + 0.5 * theta_int;
}

double p_functional(const MixtureXi& xi, const MatrixStepPath& pi) {
  double theta_int = 0.0;
  for (std::size_t j = 0; j < pi.v.size(); ++j)
    theta_int += theta_eval(xi, pi.v[j]) * (pi.u[j + 1] - pi.u[j]);
  return -psi_of_path(half_grad_xi_path(xi, pi)) + 0.5 * theta_int;
}

LemmaCheck check_lemma(const MixtureXi& xi, const StepCdf& alpha) {
  LemmaCheck out;
  out.f_value = f_functional(xi, alpha);
  MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
  out.p_value = p_functional(xi, pi);
  out.discrepancy = std::abs(out.f_value - out.p_value);
  return out;
}

LemmaCheck check_lemma(const MixtureXi& xi, const StepCdf& alpha,
                       const GridSpec& f_grid, const GridSpec& psi_grid) {
  LemmaCheck out;
  out.f_value = f_functional(xi, alpha, f_grid);
  MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
  out.p_value = p_functional(xi, pi, psi_grid);
  out.discrepancy = std::abs(out.f_value - out.p_value);
  return out;
}

}  // namespace pottsglass
