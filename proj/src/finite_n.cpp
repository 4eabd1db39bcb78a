#include "pottsglass/finite_n.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace pottsglass {

namespace {

constexpr std::uint64_t kStateCap = std::uint64_t(1) << 22;

std::uint64_t pow_u64(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Sum of the rank-p tensor over all tuples drawn from one color class.
double same_color_sum(const std::vector<double>& g, int p, int N,
                      const std::vector<int>& members, std::vector<int>& odo) {
  const int n = int(members.size());
  if (n == 0) return 0.0;
  odo.assign(std::size_t(p), 0);
  double total = 0.0;
  while (true) {
    std::size_t flat = 0;
    for (int j = 0; j < p; ++j)
      flat = flat * std::size_t(N) + std::size_t(members[std::size_t(odo[std::size_t(j)])]);
    total += g[flat];
    int j = p - 1;
    while (j >= 0 && ++odo[std::size_t(j)] == n) odo[std::size_t(j--)] = 0;
    if (j < 0) break;
  }
  return total;
}

// Inner-loop form: color classes and the tuple odometer are caller-owned so
// the enumeration in free_energy_exact stays allocation-free.
double hamiltonian_on_classes(const MixtureXi& xi, const DisorderSample& sample,
                              const std::vector<std::vector<int>>& classes,
                              std::vector<int>& odo) {
  double h = 0.0;
  for (std::size_t term = 0; term < xi.betas.size(); ++term) {
    const int p = xi.betas[term].first;
    const double beta = xi.betas[term].second;
    if (beta == 0.0) continue;
    const std::vector<double>& g = sample.tensors[term].second;
    double tuples = 0.0;
    for (const auto& members : classes)
      tuples += same_color_sum(g, p, sample.N, members, odo);
    h += beta * std::pow(double(sample.N), -0.5 * (p - 1)) * tuples;
  }
  return h;
}

void fill_classes(int D, const std::vector<int>& colors,
                  std::vector<std::vector<int>>& classes) {
  classes.resize(std::size_t(D));
  for (auto& cl : classes) cl.clear();
  for (std::size_t i = 0; i < colors.size(); ++i)
    classes[std::size_t(colors[i])].push_back(int(i));
}

void check_labels(int D, int N, const std::vector<int>& colors) {
  if (int(colors.size()) != N) throw std::invalid_argument("color label out of range");
  for (int c : colors)
    if (c < 0 || c >= D) throw std::invalid_argument("color label out of range");
}

}  // namespace

DisorderSample sample_disorder(const MixtureXi& xi, int N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  DisorderSample s;
  s.N = N;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& [p, beta] : xi.betas) {
    (void)beta;
    std::vector<double> g(pow_u64(std::uint64_t(N), p));
    for (auto& x : g) x = gauss(rng);
    s.tensors.emplace_back(p, std::move(g));
  }
  return s;
}

double hamiltonian(const MixtureXi& xi, const DisorderSample& sample,
                   const std::vector<int>& colors) {
  check_labels(xi.D, sample.N, colors);
  std::vector<std::vector<int>> classes;
  std::vector<int> odo;
  fill_classes(xi.D, colors, classes);
  return hamiltonian_on_classes(xi, sample, classes, odo);
}

double free_energy_exact(const MixtureXi& xi, const DisorderSample& sample) {
  const int N = sample.N;
  const int D = xi.D;
  std::uint64_t states = 1;
  for (int i = 0; i < N; ++i) {
    states *= std::uint64_t(D);
    if (states > kStateCap) throw std::invalid_argument("state space too large");
  }

  std::vector<int> colors(std::size_t(N), 0);
  std::vector<std::vector<int>> classes;
  std::vector<int> odo;
  SymMatD self(D, 0.0);
  double lse_max = -std::numeric_limits<double>::infinity();
  double lse_sum = 0.0;
  while (true) {
    fill_classes(D, colors, classes);
    for (int k = 0; k < D; ++k)
      self.at(k, k) = double(classes[std::size_t(k)].size()) / N;
    double energy = hamiltonian_on_classes(xi, sample, classes, odo) -
                    0.5 * N * xi_eval(xi, self);

    if (energy > lse_max) {
      lse_sum = lse_sum * std::exp(lse_max - energy) + 1.0;
      lse_max = energy;
    } else {
      lse_sum += std::exp(energy - lse_max);
    }

    int i = N - 1;
    while (i >= 0 && ++colors[std::size_t(i)] == D) colors[std::size_t(i--)] = 0;
    if (i < 0) break;
  }
  return (lse_max + std::log(lse_sum) - N * std::log(double(D))) / N;
}

FreeEnergyEstimate estimate_FN(const MixtureXi& xi, int N, int n_samples,
                               std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("samples must be positive");
  FreeEnergyEstimate est;
  est.N = N;
  est.D = xi.D;
  est.samples = n_samples;
  est.seed = seed;

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) {
    std::uint64_t sj = seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(j + 1);
    values[std::size_t(j)] = free_energy_exact(xi, sample_disorder(xi, N, sj));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_samples;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  est.mean = mean;
  est.std_error =
      n_samples > 1 ? std::sqrt(var / (double(n_samples) * (n_samples - 1))) : 0.0;
  return est;
}

}  // namespace pottsglass
