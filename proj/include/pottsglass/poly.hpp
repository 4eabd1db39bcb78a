#pragma once

#include <vector>

namespace pottsglass {

// Dense univariate polynomial, coefficient c[i] on s^i.
struct Poly {
  std::vector<double> c;

  double eval(double s) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * s + c[i];
    return v;
  }

  Poly derivative() const {
    if (c.size() <= 1) return Poly{};
    Poly d;
    d.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * double(i);
    return d;
  }

  Poly antiderivative() const {
    Poly a;
    a.c.assign(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) a.c[i + 1] = c[i] / double(i + 1);
    return a;
  }

  // Exact integral over [lo, hi].
  double integral(double lo, double hi) const {
    Poly a = antiderivative();
    return a.eval(hi) - a.eval(lo);
  }
};

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r;
  r.c.assign(std::max(a.c.size(), b.c.size()), 0.0);
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
  for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
  return r;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  if (a.c.empty() || b.c.empty()) return r;
  r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

inline Poly poly_scale(const Poly& a, double s) {
  Poly r = a;
  for (auto& x : r.c) x *= s;
  return r;
}

// a^n by repeated multiplication; a^0 = 1.
inline Poly poly_pow(const Poly& a, int n) {
  Poly r;
  r.c = {1.0};
  for (int i = 0; i < n; ++i) r = poly_mul(r, a);
  return r;
}

}  // namespace pottsglass
