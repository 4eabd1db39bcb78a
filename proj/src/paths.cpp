#include "pottsglass/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pottsglass {

namespace {

constexpr double kMergeTol = 1e-14;

void check_breakpoints(const std::vector<double>& t, std::size_t nvals) {
  if (t.size() != nvals + 1) throw std::invalid_argument("breakpoint/height size mismatch");
  for (double x : t)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("value outside [0,1]");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("breakpoints not strictly increasing");
  if (t.front() != 0.0 || t.back() != 1.0)
    throw std::invalid_argument("breakpoints must span [0,1]");
}

}  // namespace

double StepCdf::value_at(double s) const {
  if (s <= t.front()) return m.front();
  // Left-continuous: value on (t[i], t[i+1]].
  auto it = std::lower_bound(t.begin() + 1, t.end(), s);
  const std::size_t i = std::size_t(it - t.begin()) - 1;
  return m[std::min(i, m.size() - 1)];
}

StepCdf make_step_cdf(const std::vector<double>& t, const std::vector<double>& m) {
  check_breakpoints(t, m.size());
  for (double h : m)
    if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("value outside [0,1]");
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m[i] < m[i - 1] - kMergeTol) throw std::invalid_argument("non-monotone heights");

  StepCdf out;
  out.t.push_back(0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!out.m.empty() && std::abs(m[i] - out.m.back()) <= kMergeTol) {
      out.t.back() = t[i + 1];  // merge equal heights
    } else {
      out.m.push_back(m[i]);
      out.t.push_back(t[i + 1]);
    }
  }
  return out;
}

double l1_distance(const StepCdf& a, const StepCdf& b) {
  std::vector<double> cuts;
  cuts.reserve(a.t.size() + b.t.size());
  cuts.insert(cuts.end(), a.t.begin(), a.t.end());
  cuts.insert(cuts.end(), b.t.begin(), b.t.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i - 1] + cuts[i]);
    acc += std::abs(a.value_at(mid) - b.value_at(mid)) * (cuts[i] - cuts[i - 1]);
  }
  return acc;
}

double StepQuantile::value_at(double s) const {
  if (s <= u.front()) return z.front();
  auto it = std::lower_bound(u.begin() + 1, u.end(), s);
  const std::size_t i = std::size_t(it - u.begin()) - 1;
  return z[std::min(i, z.size() - 1)];
}

StepQuantile quantile_inverse(const StepCdf& alpha) {
  StepQuantile q;
  q.u.push_back(0.0);
  double prev_height = 0.0;
  for (int i = 0; i < alpha.steps(); ++i) {
    // On (prev_height, m[i]] the infimum is the interval's left breakpoint.
    if (alpha.m[std::size_t(i)] > prev_height + kMergeTol) {
      q.u.push_back(alpha.m[std::size_t(i)]);
      q.z.push_back(alpha.t[std::size_t(i)]);
      prev_height = alpha.m[std::size_t(i)];
    }
  }
  if (prev_height < 1.0 - kMergeTol) {
    // alpha stays below s on [0,1) there, and alpha(1)=1 pins the infimum.
    q.u.push_back(1.0);
    q.z.push_back(1.0);
  } else {
    q.u.back() = 1.0;
  }
  return q;
}

bool MatrixStepPath::exchangeable(std::vector<ExchangeableMat>* out) const {
  std::vector<ExchangeableMat> tmp(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    if (!exch_from_dense(v[j], tmp[j])) return false;
  if (out) *out = std::move(tmp);
  return true;
}

MatrixStepPath make_matrix_step_path(int D, const std::vector<double>& u,
                                     const std::vector<SymMatD>& v) {
  check_breakpoints(u, v.size());
  for (const auto& m : v) {
    if (m.D != D) throw std::invalid_argument("path value dimension mismatch");
    if (sym_min_eig(m) < -1e-12) throw std::invalid_argument("path values must be PSD");
  }
  for (std::size_t j = 1; j < v.size(); ++j)
    if (sym_min_eig(sym_sub(v[j], v[j - 1])) < -1e-12)
      throw std::invalid_argument("increment not PSD");

  MatrixStepPath out;
  out.D = D;
  out.u.push_back(0.0);
  auto equal = [](const SymMatD& x, const SymMatD& y) {
    for (std::size_t i = 0; i < x.a.size(); ++i)
      if (std::abs(x.a[i] - y.a[i]) > kMergeTol) return false;
    return true;
  };
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!out.v.empty() && equal(v[j], out.v.back())) {
      out.u.back() = u[j + 1];
    } else {
      out.v.push_back(v[j]);
      out.u.push_back(u[j + 1]);
    }
  }
  return out;
}

MatrixStepPath compose_psi(const StepQuantile& z, int D) {
  std::vector<SymMatD> vals;
  vals.reserve(z.z.size());
  for (double s : z.z) vals.push_back(psi_embed(D, s).dense());
  return make_matrix_step_path(D, z.u, vals);
}

}  // namespace pottsglass
