#pragma once

// Step-function order parameters: CDFs on [0,1], their left-continuous
// quantile inverses, and increasing matrix-valued step paths.

#include <vector>

#include "pottsglass/model.hpp"

namespace pottsglass {

// Nondecreasing step function on [0,1]: value m[i] on (t[i], t[i+1]],
// t.front() == 0, t.back() == 1, heights in [0,1].  Canonical form merges
// adjacent intervals whose heights agree to 1e-14.
struct StepCdf {
  std::vector<double> t;  // k+1 breakpoints
  std::vector<double> m;  // k heights

  int steps() const { return int(m.size()); }
  // Height on the interval containing s; value_at(0) = m[0].
  double value_at(double s) const;
};

StepCdf make_step_cdf(const std::vector<double>& t, const std::vector<double>& m);

// Exact integral of |a - b| over [0,1] (merged breakpoint sweep).
double l1_distance(const StepCdf& a, const StepCdf& b);

// Left-continuous generalized inverse: value z[j] on (u[j], u[j+1]].
struct StepQuantile {
  std::vector<double> u;  // r+1 breakpoints, u.front() == 0, u.back() == 1
  std::vector<double> z;  // r values, strictly increasing, in [0,1]

  double value_at(double s) const;
};

// inf{ t : s <= alpha(t) }, as a step function of s.
StepQuantile quantile_inverse(const StepCdf& alpha);

// Increasing matrix path: value v[j] on (u[j], u[j+1]].  Values are dense
// symmetric PSD matrices; consecutive differences must be PSD within 1e-12.
struct MatrixStepPath {
  int D = 0;
  std::vector<double> u;     // r+1 breakpoints, u.front() == 0, u.back() == 1
  std::vector<SymMatD> v;    // r values

  int segments() const { return int(v.size()); }
  // True when every value is exchangeable (within 1e-12 per entry).
  bool exchangeable(std::vector<ExchangeableMat>* out = nullptr) const;
};

MatrixStepPath make_matrix_step_path(int D, const std::vector<double>& u,
                                     const std::vector<SymMatD>& v);

// psi_embed composed with a quantile path: the exchangeable image of z.
MatrixStepPath compose_psi(const StepQuantile& z, int D);

}  // namespace pottsglass
