#include "pottsglass/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pottsglass {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTinyExponent = 1e-12;
constexpr double kTinyVariance = 1e-30;
constexpr double kKernelReach = 8.5;  // kernel truncated at this many sigmas
constexpr double kQuadWeightFloor = 1e-18;

double node_coord(int i, double extent, double dy) { return -extent + i * dy; }

std::size_t total_nodes(int dim, int n) {
  std::size_t t = 1;
  for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(n);
  return t;
}

double norm_pdf(double x, double sigma) {
  const double u = x / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * kPi));
}

double norm_cdf(double x, double sigma) {
  return 0.5 * (1.0 + std::erf(x / (sigma * std::sqrt(2.0))));
}

// Interpolation taps along one axis: cubic convolution inside the grid,
// linear extrapolation (or a hard error) outside. `t` is in node units.
struct AxisTaps {
  int idx[4];
  double w[4];
  int count;
};

AxisTaps axis_taps(double t, int n, bool extrapolate) {
  AxisTaps a{};
  if (t < 0.0 || t > n - 1.0) {
    if (!extrapolate) throw std::runtime_error("quadrature outside grid");
    a.count = 2;
    if (t < 0.0) {
      a.idx[0] = 0;
      a.idx[1] = 1;
      a.w[0] = 1.0 - t;
      a.w[1] = t;
    } else {
      a.idx[0] = n - 2;
      a.idx[1] = n - 1;
      const double u = t - (n - 2);
      a.w[0] = 1.0 - u;
      a.w[1] = u;
    }
    return a;
  }
  int i = static_cast<int>(std::floor(t));
  if (i > n - 2) i = n - 2;
  const double u = t - i;
  const double u2 = u * u, u3 = u2 * u;
  a.count = 4;
  a.idx[0] = std::max(i - 1, 0);
  a.idx[1] = i;
  a.idx[2] = i + 1;
  a.idx[3] = std::min(i + 2, n - 1);
  a.w[0] = 0.5 * (-u3 + 2.0 * u2 - u);
  a.w[1] = 0.5 * (3.0 * u3 - 5.0 * u2 + 2.0);
  a.w[2] = 0.5 * (-3.0 * u3 + 4.0 * u2 + u);
  a.w[3] = 0.5 * (u3 - u2);
  return a;
}

double tensor_interp(const std::vector<double>& data, int dim, int n,
                     const AxisTaps* taps) {
  // Row-major layout: stride of axis a is n^(dim-1-a).
  std::size_t stride[3] = {1, 1, 1};
  for (int a = dim - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(n);
  double acc = 0.0;
  const int c0 = taps[0].count;
  const int c1 = dim > 1 ? taps[1].count : 1;
  const int c2 = dim > 2 ? taps[2].count : 1;
  for (int i0 = 0; i0 < c0; ++i0) {
    const std::size_t b0 = taps[0].idx[i0] * stride[0];
    const double w0 = taps[0].w[i0];
    for (int i1 = 0; i1 < c1; ++i1) {
      const std::size_t b1 = b0 + (dim > 1 ? taps[1].idx[i1] * stride[1] : 0);
      const double w01 = w0 * (dim > 1 ? taps[1].w[i1] : 1.0);
      for (int i2 = 0; i2 < c2; ++i2) {
        const std::size_t b2 = b1 + (dim > 2 ? taps[2].idx[i2] * stride[2] : 0);
        acc += w01 * (dim > 2 ? taps[2].w[i2] : 1.0) * data[b2];
      }
    }
  }
  return acc;
}

double interp_at(const std::vector<double>& data, int dim, int n, double extent,
                 double dy, const double* y, bool extrapolate) {
  AxisTaps taps[3] = {};
  for (int a = 0; a < dim; ++a)
    taps[a] = axis_taps((y[a] + extent) / dy, n, extrapolate);
  return tensor_interp(data, dim, n, taps);
}

// One axis pass of the separable convolution. In log_space mode the data is
// positive and padded geometrically from the edge ratios (a linear model of
// its logarithm); otherwise it is padded linearly.
void convolve_axis(std::vector<double>& data, int dim, int n, int axis,
                   const std::vector<double>& kernel, bool log_space) {
  const int w = (static_cast<int>(kernel.size()) - 1) / 2;
  std::size_t inner = 1;
  for (int a = dim - 1 - axis; a > 0; --a) inner *= static_cast<std::size_t>(n);
  std::size_t outer = total_nodes(dim, n) / (inner * static_cast<std::size_t>(n));

  std::vector<double> line(static_cast<std::size_t>(n) + 2 * w);
  std::vector<double> out(total_nodes(dim, n));

  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * static_cast<std::size_t>(n) * inner + i;
      for (int t = 0; t < n; ++t) line[w + t] = data[base + t * inner];

      if (log_space) {
        const double rl = line[w] / line[w + 1];
        const double rr = line[w + n - 1] / line[w + n - 2];
        double pl = line[w], pr = line[w + n - 1];
        for (int t = 1; t <= w; ++t) {
          pl *= rl;
          pr *= rr;
          line[w - t] = pl;
          line[w + n - 1 + t] = pr;
        }
      } else {
        const double sl = line[w] - line[w + 1];
        const double sr = line[w + n - 1] - line[w + n - 2];
        for (int t = 1; t <= w; ++t) {
          line[w - t] = line[w] + sl * t;
          line[w + n - 1 + t] = line[w + n - 1] + sr * t;
        }
      }

      for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        const double* src = line.data() + t;
        for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * src[k];
        out[base + t * inner] = acc;
      }
    }
  }
  data.swap(out);
}

void apply_level(std::vector<double>& data, int dim, int n, double dy, int D,
                 const PdeLevel& level) {
  const double lperp_raw = level.delta.lambda_perp();
  const double lu_raw = level.delta.lambda_uniform();
  if (lperp_raw < -1e-12 || lu_raw < -1e-12)
    throw std::invalid_argument("increment not PSD");
  const double lperp = std::max(lperp_raw, 0.0);
  const double lu = std::max(lu_raw, 0.0);
  const double m = level.m;
  const double shift = m * lu / (2.0 * D);

  if (lperp < kTinyVariance) {
    if (shift != 0.0)
      for (double& v : data) v += shift;
    return;
  }

  const double sigma = std::sqrt(lperp);
  const std::vector<double> kernel = gaussian_kernel(sigma, dy);

  if (m > kTinyExponent) {
    double c = -std::numeric_limits<double>::infinity();
    for (double v : data) c = std::max(c, v);
    for (double& v : data) v = std::exp(m * (v - c));
    for (int a = 0; a < dim; ++a) convolve_axis(data, dim, n, a, kernel, true);
    for (double& v : data) v = c + std::log(v) / m + shift;
  } else {
    for (int a = 0; a < dim; ++a) convolve_axis(data, dim, n, a, kernel, false);
    if (shift != 0.0)
      for (double& v : data) v += shift;
  }
}

// The boundary extrapolation corrupts an outer band whose reach is set by the
// composed smearing bandwidth. Requiring 6 sigma of headroom keeps the mass
// of corrupted contributions at any readable point below ~2e-9.
void check_smear(const std::vector<PdeLevel>& levels, const GridSpec& grid) {
  double total = 0.0;
  for (const PdeLevel& lvl : levels) {
    const double lperp = lvl.delta.lambda_perp();
    if (lperp < -1e-12 || lvl.delta.lambda_uniform() < -1e-12)
      throw std::invalid_argument("increment not PSD");
    total += std::max(lperp, 0.0);
  }
  if (6.0 * std::sqrt(total) > grid.extent)
    throw std::runtime_error("grid underflow");
}

void check_grid(const GridSpec& grid) {
  if (grid.points < 16 || !(grid.extent > 0.0))
    throw std::invalid_argument("grid spec invalid");
}

std::vector<double> terminal_grid(int D, const Eigen::MatrixXd& frame,
                                  const GridSpec& grid, double terminal_diag) {
  const int dim = D - 1;
  const int n = grid.points;
  const double dy = grid.spacing();
  std::vector<double> out(total_nodes(dim, n));
  std::vector<double> y(dim), x(D);
  const int n1 = dim > 1 ? n : 1;
  const int n2 = dim > 2 ? n : 1;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    y[0] = node_coord(i0, grid.extent, dy);
    for (int i1 = 0; i1 < n1; ++i1) {
      if (dim > 1) y[1] = node_coord(i1, grid.extent, dy);
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        if (dim > 2) y[2] = node_coord(i2, grid.extent, dy);
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < D; ++k) {
          x[k] = 0.0;
          for (int j = 0; j < dim; ++j) x[k] += frame(k, j) * y[j];
          mx = std::max(mx, x[k]);
        }
        double acc = 0.0;
        for (int k = 0; k < D; ++k) acc += std::exp(x[k] - mx);
        out[idx] = mx + std::log(acc) - std::log(static_cast<double>(D)) -
                   0.5 * terminal_diag;
      }
    }
  }
  return out;
}

double base_expectation_on(const std::vector<double>& data, int dim, int n,
                           double extent, double dy,
                           const ExchangeableMat& base_cov) {
  const double lperp_raw = base_cov.lambda_perp();
  if (lperp_raw < -1e-12 || base_cov.lambda_uniform() < -1e-12)
    throw std::invalid_argument("increment not PSD");
  const double lperp = std::max(lperp_raw, 0.0);
  if (lperp < kTinyVariance) {
    std::vector<double> origin(dim, 0.0);
    return interp_at(data, dim, n, extent, dy, origin.data(), false);
  }
  const double s = std::sqrt(lperp);
  std::vector<double> nodes, weights;
  gauss_hermite(40, nodes, weights);
  std::vector<double> fn, fw;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (weights[i] < kQuadWeightFloor) continue;
    fn.push_back(nodes[i]);
    fw.push_back(weights[i]);
  }
  const int q = static_cast<int>(fn.size());
  const int q1 = dim > 1 ? q : 1;
  const int q2 = dim > 2 ? q : 1;
  double acc = 0.0;
  double y[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < q; ++a) {
    y[0] = s * fn[a];
    for (int b = 0; b < q1; ++b) {
      if (dim > 1) y[1] = s * fn[b];
      for (int c = 0; c < q2; ++c) {
        if (dim > 2) y[2] = s * fn[c];
        double w = fw[a];
        if (dim > 1) w *= fw[b];
        if (dim > 2) w *= fw[c];
        acc += w * interp_at(data, dim, n, extent, dy, y, false);
      }
    }
  }
  return acc;
}

}  // namespace

// Odd counts place the origin on a node; the base expectation reads there
// exactly whenever the base covariance has no perp component.
int GridSpec::default_points(int reduced_dim) {
  switch (reduced_dim) {
    case 1:
      return 4097;
    case 2:
      return 513;
    case 3:
      return 97;
    default:
      throw std::invalid_argument("D must be in {2,3,4}");
  }
}

GridSpec GridSpec::defaults_for(const MixtureXi& xi) {
  const double lperp = mu_eval(xi, 1.0).lambda_perp();
  GridSpec g;
  g.points = default_points(xi.D - 1);
  g.extent = 8.0 * std::sqrt(std::max(lperp, 0.0) + 1.0);
  return g;
}

GridSpec GridSpec::defaults_for_levels(int reduced_dim, double terminal_lperp,
                                       double base_lperp) {
  GridSpec g;
  g.points = default_points(reduced_dim);
  g.extent = std::max(8.0 * std::sqrt(std::max(terminal_lperp, 0.0) + 1.0),
                      9.5 * std::sqrt(std::max(base_lperp, 0.0)) + 0.5);
  return g;
}

Eigen::MatrixXd helmert_frame(int D) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(D, D - 1);
  for (int j = 1; j < D; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
    for (int k = 0; k < j; ++k) v(k, j - 1) = 1.0 / norm;
    v(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return v;
}

void gauss_hermite(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw std::invalid_argument("quadrature order must be positive");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i + 1 < q; ++i) {
    const double b = std::sqrt(static_cast<double>(i + 1));
    jac(i, i + 1) = b;
    jac(i + 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(q);
  weights.resize(q);
  for (int i = 0; i < q; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

std::vector<double> gaussian_kernel(double sigma, double dy) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const int w = static_cast<int>(std::ceil(kKernelReach * sigma / dy)) + 2;
  std::vector<double> k(2 * w + 1);
  if (sigma >= dy) {
    for (int t = -w; t <= w; ++t)
      k[t + w] = std::exp(-0.5 * (t * dy) * (t * dy) / (sigma * sigma));
  } else {
    // Exact Gaussian mass against the hat reconstruction of the data; tends
    // to the identity as sigma -> 0.
    for (int t = -w; t <= w; ++t) {
      const double a = (t - 1) * dy, b = t * dy, c = (t + 1) * dy;
      const double s2 = sigma * sigma;
      const double left = s2 * (norm_pdf(a, sigma) - norm_pdf(b, sigma)) -
                          a * (norm_cdf(b, sigma) - norm_cdf(a, sigma));
      const double right = c * (norm_cdf(c, sigma) - norm_cdf(b, sigma)) -
                           s2 * (norm_pdf(b, sigma) - norm_pdf(c, sigma));
      k[t + w] = (left + right) / dy;
    }
  }
  double sum = 0.0;
  for (double v : k) sum += v;
  for (double& v : k) v /= sum;
  return k;
}

double terminal_condition(const MixtureXi& xi, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != xi.D)
    throw std::invalid_argument("point dimension mismatch");
  const double diag = mu_eval(xi, 1.0).diag;
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - 0.5 * diag - mx);
  return mx + std::log(acc) - std::log(static_cast<double>(xi.D));
}

double PdeSolution::eval_reduced(std::size_t level_index,
                                 const std::vector<double>& y) const {
  if (level_index >= phi.size()) throw std::invalid_argument("level index out of range");
  if (static_cast<int>(y.size()) != dim)
    throw std::invalid_argument("point dimension mismatch");
  return interp_at(phi[level_index], dim, grid.points, grid.extent,
                   grid.spacing(), y.data(), true);
}

double PdeSolution::eval_full(std::size_t level_index,
                              const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != D)
    throw std::invalid_argument("point dimension mismatch");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= D;
  std::vector<double> y(dim, 0.0);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < D; ++k) y[j] += frame(k, j) * x[k];
  return mean + eval_reduced(level_index, y);
}

PdeSolution solve_backward_recursion(int D, double terminal_diag,
                                     const std::vector<PdeLevel>& levels,
                                     const GridSpec& grid) {
  if (D < 2 || D > 4) throw std::invalid_argument("D must be in {2,3,4}");
  check_grid(grid);
  check_smear(levels, grid);
  PdeSolution sol;
  sol.D = D;
  sol.dim = D - 1;
  sol.grid = grid;
  sol.frame = helmert_frame(D);
  sol.terminal_diag = terminal_diag;
  sol.levels = levels;
  sol.phi.resize(levels.size() + 1);
  sol.phi[levels.size()] = terminal_grid(D, sol.frame, grid, terminal_diag);
  for (std::size_t j = levels.size(); j-- > 0;) {
    sol.phi[j] = sol.phi[j + 1];
    apply_level(sol.phi[j], sol.dim, grid.points, grid.spacing(), D, levels[j]);
  }
  return sol;
}

PdeSolution solve_cole_hopf(const MixtureXi& xi, const StepCdf& alpha,
                            const GridSpec& grid) {
  const std::size_t k = alpha.m.size();
  std::vector<PdeLevel> levels(k);
  for (std::size_t i = 0; i < k; ++i) {
    levels[i].m = alpha.m[i];
    levels[i].delta =
        exch_sub(mu_eval(xi, alpha.t[i + 1]), mu_eval(xi, alpha.t[i]));
  }
  return solve_backward_recursion(xi.D, mu_eval(xi, 1.0).diag, levels, grid);
}

PdeSolution fd_oracle_solve(const MixtureXi& xi, const StepCdf& alpha,
                            const GridSpec& grid) {
  if (xi.D != 2) throw std::invalid_argument("fd oracle requires D=2");
  check_grid(grid);
  const int n = grid.points;
  const double dy = grid.spacing();
  const int D = 2;

  // Exact polynomial eigenvalue rates of the clock derivative.
  const Poly lperp_rate =
      poly_add(mu_diag_poly(xi), poly_scale(mu_offdiag_poly(xi), -1.0)).derivative();
  const Poly lu_rate =
      poly_add(mu_diag_poly(xi), poly_scale(mu_offdiag_poly(xi), D - 1.0)).derivative();

  PdeSolution sol;
  sol.D = D;
  sol.dim = 1;
  sol.grid = grid;
  sol.frame = helmert_frame(D);
  sol.terminal_diag = mu_eval(xi, 1.0).diag;
  const std::size_t k = alpha.m.size();
  sol.levels.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    sol.levels[i].m = alpha.m[i];
    sol.levels[i].delta =
        exch_sub(mu_eval(xi, alpha.t[i + 1]), mu_eval(xi, alpha.t[i]));
  }
  check_smear(sol.levels, grid);
  sol.phi.resize(k + 1);
  sol.phi[k] = terminal_grid(D, sol.frame, grid, sol.terminal_diag);

  constexpr long kMaxTotalSteps = 2000000;
  long total_steps = 0;
  std::vector<double> cur = sol.phi[k], next(cur.size());

  for (std::size_t i = k; i-- > 0;) {
    const double s_hi = alpha.t[i + 1], s_lo = alpha.t[i];
    const double len = s_hi - s_lo;
    const double m = alpha.m[i];
    double lmax = 0.0;
    for (int p = 0; p <= 16; ++p)
      lmax = std::max(lmax, std::abs(lperp_rate.eval(s_lo + len * p / 16.0)));
    long steps = 1;
    if (lmax > 1e-14) {
      const double dt_max = 0.4 * dy * dy / lmax;
      steps = static_cast<long>(std::ceil(len / dt_max));
    }
    total_steps += steps;
    if (total_steps > kMaxTotalSteps) throw std::runtime_error("CFL violation");
    const double dt = len / steps;
    for (long q = 0; q < steps; ++q) {
      const double s_mid = s_hi - (q + 0.5) * dt;
      const double lp = lperp_rate.eval(s_mid);
      const double lu = lu_rate.eval(s_mid);
      const double src = m * lu / (2.0 * D);
      for (int j = 0; j < n; ++j) {
        const double left = j > 0 ? cur[j - 1] : 2.0 * cur[0] - cur[1];
        const double right = j < n - 1 ? cur[j + 1] : 2.0 * cur[n - 1] - cur[n - 2];
        const double d2 = (right - 2.0 * cur[j] + left) / (dy * dy);
        const double d1 = (right - left) / (2.0 * dy);
        next[j] = cur[j] + dt * (0.5 * lp * (d2 + m * d1 * d1) + src);
      }
      cur.swap(next);
    }
    sol.phi[i] = cur;
  }
  return sol;
}

double eval_base_expectation(const PdeSolution& sol, const ExchangeableMat& base_cov) {
  return base_expectation_on(sol.phi[0], sol.dim, sol.grid.points, sol.grid.extent,
                             sol.grid.spacing(), base_cov);
}

double eval_phi0_expectation(const PdeSolution& sol, const MixtureXi& xi) {
  return eval_base_expectation(sol, mu_eval(xi, 0.0));
}

double resume_backward_value(const PdeSolution& sol, std::size_t level,
                             const std::vector<double>& m_override,
                             const ExchangeableMat& base_cov) {
  if (level >= sol.levels.size())
    throw std::invalid_argument("level index out of range");
  if (m_override.size() < sol.levels.size())
    throw std::invalid_argument("exponent override too short");
  std::vector<double> data = sol.phi[level + 1];
  for (std::size_t j = level + 1; j-- > 0;) {
    PdeLevel lvl = sol.levels[j];
    lvl.m = m_override[j];
    apply_level(data, sol.dim, sol.grid.points, sol.grid.spacing(), sol.D, lvl);
  }
  return base_expectation_on(data, sol.dim, sol.grid.points, sol.grid.extent,
                             sol.grid.spacing(), base_cov);
}

double Dense2dSolution::eval(std::size_t level_index, double x0, double x1) const {
  if (level_index >= phi.size()) throw std::invalid_argument("level index out of range");
  const double dy = grid.spacing();
  AxisTaps taps[2] = {axis_taps((x0 + grid.extent) / dy, grid.points, true),
                      axis_taps((x1 + grid.extent) / dy, grid.points, true)};
  return tensor_interp(phi[level_index], 2, grid.points, taps);
}

Dense2dSolution solve_dense_2d(double terminal_diag0, double terminal_diag1,
                               const std::vector<DenseLevel>& levels,
                               const GridSpec& grid) {
  check_grid(grid);
  Dense2dSolution sol;
  sol.grid = grid;
  sol.terminal_diag0 = terminal_diag0;
  sol.terminal_diag1 = terminal_diag1;
  sol.levels = levels;
  const int n = grid.points;
  const double dy = grid.spacing();
  const std::size_t total = static_cast<std::size_t>(n) * n;

  sol.phi.resize(levels.size() + 1);
  std::vector<double>& term = sol.phi[levels.size()];
  term.resize(total);
  for (int i0 = 0; i0 < n; ++i0) {
    const double a = node_coord(i0, grid.extent, dy) - 0.5 * terminal_diag0;
    for (int i1 = 0; i1 < n; ++i1) {
      const double b = node_coord(i1, grid.extent, dy) - 0.5 * terminal_diag1;
      const double mx = std::max(a, b);
      term[static_cast<std::size_t>(i0) * n + i1] =
          mx + std::log(std::exp(a - mx) + std::exp(b - mx)) - std::log(2.0);
    }
  }

  std::vector<double> nodes, weights;
  gauss_hermite(20, nodes, weights);
  std::vector<double> fn, fw;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (weights[i] < kQuadWeightFloor) continue;
    fn.push_back(nodes[i]);
    fw.push_back(weights[i]);
  }
  const int q = static_cast<int>(fn.size());

  for (std::size_t j = levels.size(); j-- > 0;) {
    const SymMatD s = psd_sqrt(levels[j].delta);
    const double m = levels[j].m;
    std::vector<double> ox(q * q), oy(q * q), ww(q * q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        ox[a * q + b] = s.at(0, 0) * fn[a] + s.at(0, 1) * fn[b];
        oy[a * q + b] = s.at(1, 0) * fn[a] + s.at(1, 1) * fn[b];
        ww[a * q + b] = fw[a] * fw[b];
      }
    const std::vector<double>& prev = sol.phi[j + 1];
    std::vector<double>& out = sol.phi[j];
    out.resize(total);
    std::vector<double> vals(q * q);
    for (int i0 = 0; i0 < n; ++i0) {
      const double x0 = node_coord(i0, grid.extent, dy);
      for (int i1 = 0; i1 < n; ++i1) {
        const double x1 = node_coord(i1, grid.extent, dy);
        double vmax = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < q * q; ++t) {
          AxisTaps taps[2] = {
              axis_taps((x0 + ox[t] + grid.extent) / dy, n, true),
              axis_taps((x1 + oy[t] + grid.extent) / dy, n, true)};
          vals[t] = tensor_interp(prev, 2, n, taps);
          vmax = std::max(vmax, vals[t]);
        }
        double acc = 0.0;
        if (m > kTinyExponent) {
          for (int t = 0; t < q * q; ++t)
            acc += ww[t] * std::exp(m * (vals[t] - vmax));
          out[static_cast<std::size_t>(i0) * n + i1] = vmax + std::log(acc) / m;
        } else {
          for (int t = 0; t < q * q; ++t) acc += ww[t] * vals[t];
          out[static_cast<std::size_t>(i0) * n + i1] = acc;
        }
      }
    }
  }
  return sol;
}

double eval_dense_base(const Dense2dSolution& sol, const SymMatD& base_cov) {
  const SymMatD s = psd_sqrt(base_cov);
  std::vector<double> nodes, weights;
  gauss_hermite(20, nodes, weights);
  double acc = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (weights[a] < kQuadWeightFloor) continue;
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (weights[b] < kQuadWeightFloor) continue;
      const double x0 = s.at(0, 0) * nodes[a] + s.at(0, 1) * nodes[b];
      const double x1 = s.at(1, 0) * nodes[a] + s.at(1, 1) * nodes[b];
      acc += weights[a] * weights[b] * sol.eval(0, x0, x1);
    }
  }
  return acc;
}

}  // namespace pottsglass
