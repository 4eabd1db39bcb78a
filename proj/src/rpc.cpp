#include "pottsglass/rpc.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pottsglass {

namespace {

void check_spec(const CascadeSpec& spec) {
  bool ok = spec.atoms >= 100 && spec.replicas >= 1 && spec.tail_target > 0.0;
  double prev = 0.0;
  for (double z : spec.zeta) {
    if (!(z > prev && z < 1.0)) ok = false;
    prev = z;
  }
  if (!ok) throw std::invalid_argument("cascade spec invalid");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based generator so every tree node owns an independent stream
// keyed by its path; changing the atom cap then extends sibling sets as a
// pure prefix, leaving all surviving atoms' draws untouched.
struct SplitMix64 {
  using result_type = std::uint64_t;
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

constexpr std::uint64_t kArrivalTag = 0xa881a5a5c3d2e1f0ull;
constexpr std::uint64_t kFieldTag = 0xba5ef1e1d00d5eedull;

std::uint64_t child_key(std::uint64_t parent, std::size_t index) {
  return splitmix64(parent ^ splitmix64(std::uint64_t(index) + 1));
}

// One sibling set in log space (raw log-weights decrease, so the first atom
// is the reference); returns the relative truncated mass.
template <class Rng>
double sample_weights(double zeta, int cap, double tail_target, Rng& rng,
                      std::vector<double>& out) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> lx;
  double u = 0.0, srel = 0.0, l1 = 0.0, tail_rel = 0.0;
  while (int(lx.size()) < cap) {
    u += exp1(rng);
    double l = -std::log(u) / zeta;
    if (lx.empty()) l1 = l;
    lx.push_back(l);
    srel += std::exp(l - l1);
    if (lx.size() >= 2) {
      // Expected raw mass beyond arrival u: u^(1-1/zeta) / (1/zeta - 1).
      double log_tail = (1.0 - 1.0 / zeta) * std::log(u) - std::log(1.0 / zeta - 1.0);
      tail_rel = std::exp(log_tail - l1);
      if (tail_rel <= tail_target * srel) break;
    }
  }
  out.resize(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) out[i] = std::exp(lx[i] - l1) / srel;
  return tail_rel / (srel + tail_rel);
}

void build_node(CascadeNode& node, const CascadeSpec& spec, int level,
                std::mt19937_64& rng, double& worst) {
  if (level >= spec.levels()) return;
  std::vector<double> w;
  double tail = sample_weights(spec.zeta[level], spec.atoms, spec.tail_target, rng, w);
  if (tail > worst) worst = tail;
  node.children.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    node.children[i].weight = w[i];
    build_node(node.children[i], spec, level + 1, rng, worst);
  }
}

// Streaming log-sum-exp accumulator.
struct Lse {
  double mx = -1e308;
  double s = 0.0;

  void add(double t) {
    if (t <= mx) {
      s += std::exp(t - mx);
    } else {
      s = s * std::exp(mx - t) + 1.0;
      mx = t;
    }
  }
  double value() const { return mx + std::log(s); }
};

struct CascadeEval {
  const CascadeSpec* spec = nullptr;
  int D = 0;
  std::vector<SymMatD> sqrt_delta;    // increment square root per branching
  std::vector<double> terminal_diag;  // q(1)_kk per color
  double worst_tail = 0.0;

  double leaf_value(const std::vector<double>& y) const {
    Lse lse;
    for (int k = 0; k < D; ++k)
      lse.add(std::sqrt(2.0) * y[k] - terminal_diag[k]);
    return lse.value() - std::log(double(D));
  }

  double eval(std::uint64_t key, int depth, const std::vector<double>& y) {
    if (depth >= spec->levels()) return leaf_value(y);
    SplitMix64 arrivals(splitmix64(key ^ kArrivalTag));
    std::vector<double> w;
    double tail = sample_weights(spec->zeta[depth], spec->atoms, spec->tail_target,
                                 arrivals, w);
    if (tail > worst_tail) worst_tail = tail;
    const SymMatD& A = sqrt_delta[depth];
    std::vector<double> z(D), yc(D);
    Lse lse;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::uint64_t ck = child_key(key, i);
      SplitMix64 field(splitmix64(ck ^ kFieldTag));
      std::normal_distribution<double> gauss;
      for (int k = 0; k < D; ++k) z[k] = gauss(field);
      for (int k = 0; k < D; ++k) {
        double acc = y[k];
        for (int l = 0; l < D; ++l) acc += A.at(k, l) * z[l];
        yc[k] = acc;
      }
      lse.add(std::log(w[i]) + eval(ck, depth + 1, yc));
    }
    return lse.value();
  }
};

void check_locations(const MatrixStepPath& q, const CascadeSpec& spec) {
  if (q.segments() != spec.levels() + 1)
    throw std::invalid_argument("location mismatch");
  for (int j = 0; j < spec.levels(); ++j)
    if (std::abs(q.u[j + 1] - spec.zeta[j]) > 1e-12)
      throw std::invalid_argument("location mismatch");
}

// Keeps pi's breakpoints verbatim (no canonical merging): the cascade
// structure must match spec.zeta even where an increment vanishes.
MatrixStepPath half_grad_xi_path(const MixtureXi& xi, const MatrixStepPath& pi) {
  MatrixStepPath q;
  q.D = pi.D;
  q.u = pi.u;
  q.v.resize(pi.v.size());
  for (std::size_t j = 0; j < pi.v.size(); ++j)
    q.v[j] = sym_scale(grad_xi(xi, pi.v[j]), 0.5);
  return q;
}

}  // namespace

CascadeTree sample_cascade(const CascadeSpec& spec, std::mt19937_64& rng) {
  check_spec(spec);
  CascadeTree tree;
  build_node(tree.root, spec, 0, rng, tree.max_tail_mass);
  return tree;
}

McEstimate mc_psi(const MatrixStepPath& q, const CascadeSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  check_locations(q, spec);
  int D = q.D;

  CascadeEval ev;
  ev.spec = &spec;
  ev.D = D;
  ev.terminal_diag.resize(D);
  for (int k = 0; k < D; ++k) ev.terminal_diag[k] = q.v.back().at(k, k);
  ev.sqrt_delta.resize(q.v.size() - 1);
  for (std::size_t j = 0; j + 1 < q.v.size(); ++j)
    ev.sqrt_delta[j] = psd_sqrt(sym_sub(q.v[j + 1], q.v[j]));
  SymMatD base_sqrt = psd_sqrt(q.v.front());

  McEstimate out;
  out.replicas = spec.replicas;
  out.seed = seed;
  out.atoms = spec.atoms;

  std::vector<double> values(spec.replicas);
  std::vector<double> z(D), y0(D);
  for (int rep = 0; rep < spec.replicas; ++rep) {
    std::uint64_t root = splitmix64(seed + 0x9e3779b97f4a7c15ull * std::uint64_t(rep + 1));
    SplitMix64 field(splitmix64(root ^ kFieldTag));
    std::normal_distribution<double> gauss;
    for (int k = 0; k < D; ++k) z[k] = gauss(field);
    for (int k = 0; k < D; ++k) {
      double acc = 0.0;
      for (int l = 0; l < D; ++l) acc += base_sqrt.at(k, l) * z[l];
      y0[k] = acc;
    }
    values[rep] = -ev.eval(root, 0, y0);
  }
  out.max_tail_mass = ev.worst_tail;

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(spec.replicas);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  out.mean = mean;
  out.std_error = spec.replicas > 1
                      ? std::sqrt(var / (double(spec.replicas) * double(spec.replicas - 1)))
                      : 0.0;
  return out;
}

McEstimate mc_p_functional(const MixtureXi& xi, const MatrixStepPath& pi,
                           const CascadeSpec& spec, std::uint64_t seed) {
  McEstimate est = mc_psi(half_grad_xi_path(xi, pi), spec, seed);
  double theta_int = 0.0;
  for (std::size_t j = 0; j < pi.v.size(); ++j)
    theta_int += theta_eval(xi, pi.v[j]) * (pi.u[j + 1] - pi.u[j]);
  est.mean = -est.mean + 0.5 * theta_int;
  return est;
}

}  // namespace pottsglass
