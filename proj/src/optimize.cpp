#include "pottsglass/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pottsglass {

namespace {

// Fixed data for one height-space descent: breakpoints, clock increments,
// and the exact per-interval correction integrals c_i, so that
//   value(m) = phi0(m) + theta_c - 1/2 sum_i m_i c_i
// with only phi0 requiring a recursion solve.
struct Workspace {
  int D = 0;
  GridSpec grid;
  int k = 0;
  std::vector<double> t;
  std::vector<PdeLevel> levels;  // exponents rewritten per evaluation
  double terminal_diag = 0.0;
  ExchangeableMat base_cov;
  double theta_c = 0.0;
  std::vector<double> corr_coef;
};

Workspace make_workspace(const MixtureXi& xi, int k, const GridSpec& grid) {
  Workspace ws;
  ws.D = xi.D;
  ws.grid = grid;
  ws.k = k;
  ws.t.resize(std::size_t(k) + 1);
  for (int i = 0; i <= k; ++i) ws.t[std::size_t(i)] = double(i) / k;
  ws.t.back() = 1.0;
  ws.levels.resize(std::size_t(k));
  for (int i = 0; i < k; ++i)
    ws.levels[std::size_t(i)].delta =
        exch_sub(mu_eval(xi, ws.t[std::size_t(i) + 1]), mu_eval(xi, ws.t[std::size_t(i)]));
  ws.terminal_diag = mu_eval(xi, 1.0).diag;
  ws.base_cov = mu_eval(xi, 0.0);
  ws.theta_c = 0.5 * theta_eval(xi, psi_embed(xi.D, 1.0));
  ws.corr_coef.assign(std::size_t(k), 0.0);
  if (!xi.zero()) {
    const int D = xi.D;
    Poly dens = poly_add(
        poly_scale(poly_mul(psi_diag_poly(D), mu_diag_poly(xi).derivative()), double(D)),
        poly_scale(poly_mul(psi_offdiag_poly(D), mu_offdiag_poly(xi).derivative()),
                   double(D) * double(D - 1)));
    Poly anti = dens.antiderivative();
    for (int i = 0; i < k; ++i)
      ws.corr_coef[std::size_t(i)] =
          anti.eval(ws.t[std::size_t(i) + 1]) - anti.eval(ws.t[std::size_t(i)]);
  }
  return ws;
}

struct Evaluated {
  PdeSolution sol;
  double phi0 = 0.0;
  double value = 0.0;
};

Evaluated eval_heights(Workspace& ws, const std::vector<double>& m) {
  for (int i = 0; i < ws.k; ++i) ws.levels[std::size_t(i)].m = m[std::size_t(i)];
  Evaluated ev;
  ev.sol = solve_backward_recursion(ws.D, ws.terminal_diag, ws.levels, ws.grid);
  ev.phi0 = eval_base_expectation(ev.sol, ws.base_cov);
  double corr = 0.0;
  for (int i = 0; i < ws.k; ++i) corr += m[std::size_t(i)] * ws.corr_coef[std::size_t(i)];
  ev.value = ev.phi0 + ws.theta_c - 0.5 * corr;
  return ev;
}

// Differences through the stored checkpoints: perturbing height i only
// replays levels i..0, and the correction term contributes its exact linear
// gradient -c_i/2. Central away from zero; one-sided forward when the lower
// leg would cross zero (the recursion treats negative exponents as zero,
// which would halve only the recursion part of the slope and can flip the
// sign of the combined gradient at a pinned height).
std::vector<double> gradient(const Workspace& ws, const Evaluated& ev,
                             const std::vector<double>& m, double eps) {
  std::vector<double> g(std::size_t(ws.k));
  std::vector<double> probe = m;
  for (int i = 0; i < ws.k; ++i) {
    const std::size_t ui = std::size_t(i);
    probe[ui] = m[ui] + eps;
    double up = resume_backward_value(ev.sol, ui, probe, ws.base_cov);
    double slope;
    if (m[ui] >= eps) {
      probe[ui] = m[ui] - eps;
      double dn = resume_backward_value(ev.sol, ui, probe, ws.base_cov);
      slope = (up - dn) / (2.0 * eps);
    } else {
      slope = (up - ev.phi0) / eps;
    }
    probe[ui] = m[ui];
    g[ui] = slope - 0.5 * ws.corr_coef[ui];
  }
  return g;
}

double projected_gradient_norm(const std::vector<double>& m, const std::vector<double>& g) {
  std::vector<double> moved(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) moved[i] = m[i] - g[i];
  moved = isotonic_project(moved);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += (m[i] - moved[i]) * (m[i] - moved[i]);
  return std::sqrt(s);
}

std::vector<double> start_heights(int k, std::uint64_t seed) {
  std::vector<double> m(std::size_t(k), 0.5);
  if (seed == 0) return m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& x : m) x = unif(rng);
  std::sort(m.begin(), m.end());
  return m;
}

}  // namespace

std::vector<double> isotonic_project(const std::vector<double>& v) {
  std::vector<double> level;
  std::vector<std::size_t> width;
  level.reserve(v.size());
  width.reserve(v.size());
  for (double x : v) {
    level.push_back(x);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double w0 = double(width[width.size() - 2]);
      const double w1 = double(width.back());
      level[level.size() - 2] = (w0 * level[level.size() - 2] + w1 * level.back()) / (w0 + w1);
      width[width.size() - 2] += width.back();
      level.pop_back();
      width.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t j = 0; j < level.size(); ++j)
    out.insert(out.end(), width[j], std::min(1.0, std::max(0.0, level[j])));
  return out;
}

GridSpec minimize_default_grid(const MixtureXi& xi) {
  GridSpec g = GridSpec::defaults_for(xi);
  g.points = xi.D == 2 ? 1025 : (xi.D == 3 ? 129 : 65);
  return g;
}

MinimizeResult minimize_f(const MixtureXi& xi, const MinimizeOptions& opts,
                          std::uint64_t seed, const GridSpec& grid) {
  if (opts.k < 1 || opts.fd_step <= 0.0 || opts.max_iters < 1 ||
      opts.tol_value <= 0.0 || opts.tol_l1 <= 0.0)
    throw std::invalid_argument("minimize options invalid");
  Workspace ws = make_workspace(xi, opts.k, grid);

  std::vector<double> m = start_heights(opts.k, seed);
  Evaluated ev = eval_heights(ws, m);

  MinimizeResult res;
  res.trace.push_back(ev.value);

  const double cert = 10.0 * opts.fd_step;
  std::vector<double> g = gradient(ws, ev, m, opts.fd_step);
  double pg = projected_gradient_norm(m, g);
  double last_dval = std::numeric_limits<double>::infinity();
  double last_dl1 = std::numeric_limits<double>::infinity();
  double step = 1.0;
  std::vector<double> prev_s, prev_g;
  int iter = 0;
  bool converged = false;

  while (true) {
    const bool stalled = last_dval <= opts.tol_value * (1.0 + std::abs(ev.value)) &&
                         last_dl1 <= opts.tol_l1;
    if (pg <= cert && (stalled || pg <= 1e-10)) {
      converged = true;
      break;
    }
    if (iter >= opts.max_iters) break;

    // Barzilai-Borwein step seeded from the previous move, halved until the
    // projected candidate stops increasing the value.
    if (!prev_s.empty()) {
      double ss = 0.0, sy = 0.0;
      for (int i = 0; i < opts.k; ++i) {
        ss += prev_s[std::size_t(i)] * prev_s[std::size_t(i)];
        sy += prev_s[std::size_t(i)] * (g[std::size_t(i)] - prev_g[std::size_t(i)]);
      }
      step = sy > 1e-30 ? std::min(1e4, std::max(1e-8, ss / sy)) : std::min(1e4, step * 2.0);
    }

    std::vector<double> cand;
    Evaluated cand_ev;
    bool accepted = false;
    double trial = step;
    for (int half = 0; half < 60; ++half) {
      std::vector<double> c(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) c[i] = m[i] - trial * g[i];
      c = isotonic_project(c);
      if (c == m) break;  // gradient sits in the normal cone; no move exists
      Evaluated e2 = eval_heights(ws, c);
      if (e2.value <= ev.value + 1e-12) {
        cand = std::move(c);
        cand_ev = std::move(e2);
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;  // movement below precision; certificate decides

    last_dval = ev.value - cand_ev.value;
    last_dl1 = 0.0;
    prev_s.assign(std::size_t(opts.k), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      prev_s[i] = cand[i] - m[i];
      last_dl1 += std::abs(prev_s[i]);
    }
    last_dl1 /= opts.k;
    step = trial;
    prev_g = g;
    m = std::move(cand);
    ev = std::move(cand_ev);
    res.trace.push_back(ev.value);
    ++iter;

    g = gradient(ws, ev, m, opts.fd_step);
    pg = projected_gradient_norm(m, g);
  }

  if (!converged && pg <= cert) converged = true;  // stalled at the precision floor

  if (!converged) {
    std::ostringstream msg;
    msg << "did not converge: " << iter << " iterations, projected gradient " << pg;
    throw std::runtime_error(msg.str());
  }

  res.alpha_star = make_step_cdf(ws.t, m);
  res.value = ev.value;
  res.iterations = iter;
  res.gradient_norm_final = pg;
  return res;
}

MinimizeResult minimize_f(const MixtureXi& xi, const MinimizeOptions& opts,
                          std::uint64_t seed) {
  return minimize_f(xi, opts, seed, minimize_default_grid(xi));
}

UniquenessReport multistart(const MixtureXi& xi, const MinimizeOptions& opts,
                            int n_starts, std::uint64_t seed, const GridSpec& grid) {
  if (n_starts < 2) throw std::invalid_argument("multistart needs at least two starts");
  std::vector<MinimizeResult> runs;
  runs.reserve(std::size_t(n_starts));
  for (int j = 0; j < n_starts; ++j)
    runs.push_back(minimize_f(xi, opts, seed + 1 + std::uint64_t(j), grid));

  UniquenessReport rep;
  rep.values.resize(std::size_t(n_starts));
  std::size_t best = 0;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    rep.values[j] = runs[j].value;
    if (runs[j].value < runs[best].value) best = j;
  }
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      rep.max_l1_spread =
          std::max(rep.max_l1_spread, l1_distance(runs[a].alpha_star, runs[b].alpha_star));
      rep.max_value_spread =
          std::max(rep.max_value_spread, std::abs(runs[a].value - runs[b].value));
    }
  rep.best = std::move(runs[best]);
  return rep;
}

UniquenessReport multistart(const MixtureXi& xi, const MinimizeOptions& opts,
                            int n_starts, std::uint64_t seed) {
  return multistart(xi, opts, n_starts, seed, minimize_default_grid(xi));
}

}  // namespace pottsglass
