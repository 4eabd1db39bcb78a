#pragma once

// Exact-enumeration finite-size free energies with explicitly constructed
// Gaussian disorder. The Hamiltonian sums raw i.i.d. rank-p tensors over
// same-color index tuples, which realizes the covariance N xi(overlap)
// without symmetrizing the tensors.

#include <cstdint>
#include <vector>

#include "pottsglass/model.hpp"

namespace pottsglass {

struct DisorderSample {
  int N = 0;
  std::uint64_t seed = 0;
  // One flat row-major tensor of N^p standard Gaussians per mixture term,
  // parallel to xi.betas.
  std::vector<std::pair<int, std::vector<double>>> tensors;
};

DisorderSample sample_disorder(const MixtureXi& xi, int N, std::uint64_t seed);

// sum_p beta_p N^{-(p-1)/2} sum over same-color p-tuples of g. Colors are
// labels in [0, D).
double hamiltonian(const MixtureXi& xi, const DisorderSample& sample,
                   const std::vector<int>& colors);

// (1/N) log of the uniform average over all D^N colorings of
// exp(H - (N/2) xi(self-overlap)); the self-overlap is the diagonal matrix
// of color frequencies. Throws "state space too large" past D^N = 2^22.
double free_energy_exact(const MixtureXi& xi, const DisorderSample& sample);

struct FreeEnergyEstimate {
  int N = 0;
  int D = 0;
  int samples = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

FreeEnergyEstimate estimate_FN(const MixtureXi& xi, int N, int n_samples,
                               std::uint64_t seed);

}  // namespace pottsglass
