#pragma once

// Finite-level Ruelle cascade Monte Carlo: the stochastic oracle for psi and
// P, fully independent of the grid recursion. Atoms arrive largest first by
// the arrival-time construction; counts per node adapt to a relative
// tail-mass target under a hard cap, and the worst truncated mass is
// reported with every estimate.

#include <cstdint>
#include <random>
#include <vector>

#include "pottsglass/model.hpp"
#include "pottsglass/paths.hpp"

namespace pottsglass {

struct CascadeSpec {
  std::vector<double> zeta;  // branching exponents, strictly increasing in (0,1)
  int atoms = 10000;         // per-node atom cap, >= 100
  double tail_target = 6.103515625e-05;  // 2^-14 relative truncated mass
  int replicas = 200;

  int levels() const { return int(zeta.size()); }
};

struct CascadeNode {
  double weight = 1.0;  // normalized within the sibling set
  std::vector<CascadeNode> children;
};

struct CascadeTree {
  CascadeNode root;
  double max_tail_mass = 0.0;  // worst relative truncated mass over nodes
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int replicas = 0;
  std::uint64_t seed = 0;
  int atoms = 0;
  double max_tail_mass = 0.0;
};

CascadeTree sample_cascade(const CascadeSpec& spec, std::mt19937_64& rng);

// Estimate of psi on a step path whose interior jump locations must equal
// spec.zeta (throws "location mismatch" otherwise). Each replica owns an RNG
// stream derived from (seed, replica index); the standard error is the
// replica-level sample error of the mean.
McEstimate mc_psi(const MatrixStepPath& q, const CascadeSpec& spec, std::uint64_t seed);

// mc_psi on 1/2 grad_xi o pi plus the exact theta step integral.
McEstimate mc_p_functional(const MixtureXi& xi, const MatrixStepPath& pi,
                           const CascadeSpec& spec, std::uint64_t seed);

}  // namespace pottsglass
