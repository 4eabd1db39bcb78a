#pragma once

// Projected descent of f over step order parameters with fixed uniform
// breakpoints t_i = i/k and free monotone heights. The height
// parameterization is linear, so the restricted problem inherits convexity
// and multistart coincidence is meaningful uniqueness evidence.

#include <cstdint>
#include <vector>

#include "pottsglass/functional.hpp"
#include "pottsglass/model.hpp"
#include "pottsglass/paths.hpp"
#include "pottsglass/pde.hpp"

namespace pottsglass {

// Euclidean projection onto {0 <= v_1 <= ... <= v_k <= 1}:
// pool-adjacent-violators, then clipping. Idempotent.
std::vector<double> isotonic_project(const std::vector<double>& v);

struct MinimizeOptions {
  int k = 32;              // height variables on the uniform breakpoint grid
  double fd_step = 1e-4;   // central difference step in height space
  int max_iters = 500;
  double tol_value = 1e-8;  // relative value stall
  double tol_l1 = 1e-4;     // L1 movement stall
  int starts = 10;
};

struct MinimizeResult {
  StepCdf alpha_star;
  double value = 0.0;
  int iterations = 0;
  double gradient_norm_final = 0.0;  // projected gradient at the minimizer
  std::vector<double> trace;         // accepted values, start included
};

// Barzilai-Borwein steps with halving line search; the gradient combines
// checkpointed central differences of the recursion value with the exact
// linear gradient of the correction term. seed 0 starts from flat heights
// 0.5, any other seed from a random monotone start. Throws runtime_error
// "did not converge ..." after max_iters without meeting the certificate.
MinimizeResult minimize_f(const MixtureXi& xi, const MinimizeOptions& opts,
                          std::uint64_t seed);
MinimizeResult minimize_f(const MixtureXi& xi, const MinimizeOptions& opts,
                          std::uint64_t seed, const GridSpec& grid);

struct UniquenessReport {
  double max_l1_spread = 0.0;
  double max_value_spread = 0.0;
  MinimizeResult best;
  std::vector<double> values;
};

// Runs minimize_f from n_starts random monotone starts (seeds seed+1 ...
// seed+n) and reports the pairwise spread among the minimizers.
UniquenessReport multistart(const MixtureXi& xi, const MinimizeOptions& opts,
                            int n_starts, std::uint64_t seed);
UniquenessReport multistart(const MixtureXi& xi, const MinimizeOptions& opts,
                            int n_starts, std::uint64_t seed, const GridSpec& grid);

// Coarser grid than the evaluation defaults; 2k+1 solves per descent
// iteration make the full grid uneconomical.
GridSpec minimize_default_grid(const MixtureXi& xi);

}  // namespace pottsglass
