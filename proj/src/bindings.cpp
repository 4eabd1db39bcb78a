// Python surface: thin dict-returning wrappers over the core. Inputs are
// plain python types (D, {p: beta_p}, breakpoint/height lists); validation
// errors surface as ValueError via the std::invalid_argument translation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <vector>

#include "pottsglass/finite_n.hpp"
#include "pottsglass/functional.hpp"
#include "pottsglass/model.hpp"
#include "pottsglass/optimize.hpp"
#include "pottsglass/paths.hpp"
#include "pottsglass/pde.hpp"
#include "pottsglass/rpc.hpp"

namespace py = pybind11;
using namespace pottsglass;

namespace {

MixtureXi make_xi(int D, const std::map<int, double>& betas) {
  return MixtureXi::from_betas(D, betas);
}

GridSpec pick_grid(const MixtureXi& xi, int points, double extent, bool for_minimize) {
  GridSpec g = for_minimize ? minimize_default_grid(xi) : GridSpec::defaults_for(xi);
  if (points > 0) g.points = points;
  if (extent > 0.0) g.extent = extent;
  return g;
}

py::dict alpha_dict(const StepCdf& a) {
  py::dict d;
  d["t"] = a.t;
  d["m"] = a.m;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Potts spin glass variational core";

  mod.def(
      "xi_eval",
      [](int D, const std::map<int, double>& betas,
         const std::vector<std::vector<double>>& a) {
        MixtureXi xi = make_xi(D, betas);
        SymMatD m(D, 0.0);
        if (int(a.size()) != D) throw std::invalid_argument("matrix must be D x D");
        for (int i = 0; i < D; ++i) {
          if (int(a[std::size_t(i)].size()) != D)
            throw std::invalid_argument("matrix must be D x D");
          for (int j = 0; j < D; ++j) m.at(i, j) = a[std::size_t(i)][std::size_t(j)];
        }
        return xi_eval(xi, m);
      },
      py::arg("D"), py::arg("betas"), py::arg("a"),
      "Mixture covariance function on a dense symmetric matrix.");

  mod.def(
      "evaluate",
      [](int D, const std::map<int, double>& betas, const std::vector<double>& t,
         const std::vector<double>& m, int points, double extent, bool check_lemma) {
        MixtureXi xi = make_xi(D, betas);
        StepCdf alpha = make_step_cdf(t, m);
        GridSpec grid = pick_grid(xi, points, extent, false);
        FTerms terms = f_terms(xi, alpha, grid);
        py::dict out;
        out["value"] = terms.value;
        out["phi0"] = terms.phi0;
        out["theta_term"] = terms.theta_term;
        out["correction"] = terms.correction;
        out["grid_points"] = grid.points;
        out["grid_extent"] = grid.extent;
        if (check_lemma) {
          MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
          double p = p_functional(xi, pi, grid);
          out["p_value"] = p;
          out["discrepancy"] = std::abs(terms.value - p);
        }
        return out;
      },
      py::arg("D"), py::arg("betas"), py::arg("t"), py::arg("m"),
      py::arg("points") = 0, py::arg("extent") = 0.0, py::arg("check_lemma") = false,
      "Functional value with term breakdown for a step order parameter.");

  mod.def(
      "minimize",
      [](int D, const std::map<int, double>& betas, int k, int starts,
         std::uint64_t seed, int max_iters, int points, double extent) {
        MixtureXi xi = make_xi(D, betas);
        MinimizeOptions opts;
        opts.k = k;
        opts.starts = starts;
        opts.max_iters = max_iters;
        GridSpec grid = pick_grid(xi, points, extent, true);
        py::dict out;
        MinimizeResult best;
        if (starts >= 2) {
          UniquenessReport rep = multistart(xi, opts, starts, seed, grid);
          best = rep.best;
          out["max_l1_spread"] = rep.max_l1_spread;
          out["max_value_spread"] = rep.max_value_spread;
          out["values"] = rep.values;
        } else {
          best = minimize_f(xi, opts, seed, grid);
        }
        out["value"] = best.value;
        out["alpha_star"] = alpha_dict(best.alpha_star);
        out["iterations"] = best.iterations;
        out["gradient_norm_final"] = best.gradient_norm_final;
        out["trace"] = best.trace;
        return out;
      },
      py::arg("D"), py::arg("betas"), py::arg("k") = 32, py::arg("starts") = 1,
      py::arg("seed") = 0, py::arg("max_iters") = 500, py::arg("points") = 0,
      py::arg("extent") = 0.0,
      "Projected descent over monotone step heights; starts >= 2 adds a "
      "multistart uniqueness report.");

  mod.def(
      "oracle",
      [](int D, const std::map<int, double>& betas, const std::vector<double>& t,
         const std::vector<double>& m, int atoms, int replicas, std::uint64_t seed) {
        MixtureXi xi = make_xi(D, betas);
        StepCdf alpha = make_step_cdf(t, m);
        MatrixStepPath pi = compose_psi(quantile_inverse(alpha), xi.D);
        CascadeSpec spec;
        spec.atoms = atoms;
        spec.replicas = replicas;
        spec.zeta.assign(pi.u.begin() + 1, pi.u.end() - 1);
        McEstimate est = mc_p_functional(xi, pi, spec, seed);
        py::dict out;
        out["mean"] = est.mean;
        out["se"] = est.std_error;
        out["replicas"] = est.replicas;
        out["atoms"] = est.atoms;
        out["max_tail_mass"] = est.max_tail_mass;
        out["deterministic"] = p_functional(xi, pi);
        return out;
      },
      py::arg("D"), py::arg("betas"), py::arg("t"), py::arg("m"),
      py::arg("atoms") = 2000, py::arg("replicas") = 60, py::arg("seed") = 0,
      "Cascade Monte Carlo estimate of the dual form next to its "
      "deterministic value.");

  mod.def(
      "estimate_free_energy",
      [](int D, const std::map<int, double>& betas, int N, int samples,
         std::uint64_t seed) {
        MixtureXi xi = make_xi(D, betas);
        FreeEnergyEstimate est = estimate_FN(xi, N, samples, seed);
        py::dict out;
        out["N"] = est.N;
        out["mean"] = est.mean;
        out["se"] = est.std_error;
        out["samples"] = est.samples;
        out["seed"] = est.seed;
        return out;
      },
      py::arg("D"), py::arg("betas"), py::arg("N"), py::arg("samples") = 100,
      py::arg("seed") = 0,
      "Exact-enumeration finite-size free energy averaged over disorder.");

  mod.def(
      "check_condition1",
      [](int D, const std::map<int, double>& betas) {
        Condition1Report rep = check_condition_1(make_xi(D, betas));
        py::dict out;
        out["holds"] = rep.holds;
        out["min_eig"] = rep.min_eig;
        out["argmin_s"] = rep.argmin_s;
        return out;
      },
      py::arg("D"), py::arg("betas"),
      "Uniform positivity check of the clock derivative eigenvalues.");
}
