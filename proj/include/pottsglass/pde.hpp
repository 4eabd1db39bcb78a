#pragma once
// Backward Cole-Hopf recursion engines for the Parisi-type PDE.
//
// The recursion state is a grid of values on [-L, L]^(D-1) in a fixed
// orthonormal frame orthogonal to the uniform vector. Clock increments are
// exchangeable matrices, so every level's Gaussian convolution is
// axis-separable with one scalar bandwidth, and the uniform direction
// integrates to the exact additive constant m * lambda_u / (2D) per level
// (zero when m = 0). A dense full-dimension engine covers D = 2 paths
// outside the exchangeable family.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "pottsglass/model.hpp"
#include "pottsglass/paths.hpp"

namespace pottsglass {

struct GridSpec {
  int points = 0;       // nodes per reduced axis
  double extent = 0.0;  // grid spans [-extent, extent] per axis

  double spacing() const { return 2.0 * extent / (points - 1); }

  static int default_points(int reduced_dim);
  // f-side default: L = 8 * sqrt(lambda_perp(mu(1)) + 1).
  static GridSpec defaults_for(const MixtureXi& xi);
  // Generic-level default; widens the extent so the base quadrature nodes
  // stay inside the grid.
  static GridSpec defaults_for_levels(int reduced_dim, double terminal_lperp,
                                      double base_lperp);
};

struct PdeLevel {
  double m = 0.0;         // exponent; 0 means plain expectation
  ExchangeableMat delta;  // covariance increment consumed by this level
};

// Grids are stored in forward order: phi[j] is the state at the start of
// interval j, phi[levels.size()] is the terminal condition. levels[j] maps
// phi[j+1] to phi[j].
struct PdeSolution {
  int D = 0;
  int dim = 0;  // D - 1
  GridSpec grid;
  Eigen::MatrixXd frame;  // D x (D-1), orthonormal columns orthogonal to 1
  double terminal_diag = 0.0;
  std::vector<PdeLevel> levels;
  std::vector<std::vector<double>> phi;

  double eval_reduced(std::size_t level_index, const std::vector<double>& y) const;
  // Full-space value mean(x) + phi(V^T x); exactly translation covariant.
  double eval_full(std::size_t level_index, const std::vector<double>& x) const;
};

Eigen::MatrixXd helmert_frame(int D);

// Probabilists' Gauss-Hermite rule: sum w_i f(x_i) integrates f against
// N(0,1); the weights sum to 1.
void gauss_hermite(int q, std::vector<double>& nodes, std::vector<double>& weights);

// Symmetric odd-length kernel for one axis pass of bandwidth sigma on a grid
// with spacing dy. Sampled Gaussian for sigma >= dy, exact Gaussian integral
// of the hat reconstruction for sigma < dy; always normalized to sum 1.
std::vector<double> gaussian_kernel(double sigma, double dy);

double terminal_condition(const MixtureXi& xi, const std::vector<double>& x);

// Throws "grid underflow" when six times the total smearing bandwidth
// sqrt(sum of perp increments) exceeds the extent; beyond that the boundary
// extrapolation contaminates the readable core.
PdeSolution solve_backward_recursion(int D, double terminal_diag,
                                     const std::vector<PdeLevel>& levels,
                                     const GridSpec& grid);

PdeSolution solve_cole_hopf(const MixtureXi& xi, const StepCdf& alpha,
                            const GridSpec& grid);

// Independent explicit finite-difference solver of the reduced PDE
//   d_s phi + lperp(s)/2 (phi'' + alpha(s) phi'^2) + alpha(s) lu(s)/(2D) = 0
// for D = 2, with CFL-limited steps. Returns the same solution shape.
PdeSolution fd_oracle_solve(const MixtureXi& xi, const StepCdf& alpha,
                            const GridSpec& grid);

// E over eta ~ N(0, Id) of phi_0(sqrt(base_cov) eta); the uniform component
// contributes zero by translation covariance.
double eval_base_expectation(const PdeSolution& sol, const ExchangeableMat& base_cov);
double eval_phi0_expectation(const PdeSolution& sol, const MixtureXi& xi);

// Re-run levels `level` down to 0 with overridden exponents (indices above
// `level` ignored; increments unchanged), starting from the stored
// phi[level+1]; returns the base expectation. This is the checkpoint path
// used by finite-difference gradients over heights.
double resume_backward_value(const PdeSolution& sol, std::size_t level,
                             const std::vector<double>& m_override,
                             const ExchangeableMat& base_cov);

// Dense engine for D = 2 without the exchangeable reduction: full 2-d grid,
// per-node tensor Gauss-Hermite transport, bicubic interpolation with linear
// extrapolation at the edges.
struct DenseLevel {
  double m = 0.0;
  SymMatD delta{2, 0.0};
};

struct Dense2dSolution {
  GridSpec grid;
  double terminal_diag0 = 0.0;
  double terminal_diag1 = 0.0;
  std::vector<DenseLevel> levels;
  std::vector<std::vector<double>> phi;

  double eval(std::size_t level_index, double x0, double x1) const;
};

Dense2dSolution solve_dense_2d(double terminal_diag0, double terminal_diag1,
                               const std::vector<DenseLevel>& levels,
                               const GridSpec& grid);
double eval_dense_base(const Dense2dSolution& sol, const SymMatD& base_cov);

}  // namespace pottsglass
