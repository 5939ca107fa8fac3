#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "linpsi/bench.hpp"
#include "linpsi/design.hpp"
#include "linpsi/environment.hpp"
#include "linpsi/gege.hpp"
#include "linpsi/pareto.hpp"

namespace py = pybind11;
using namespace linpsi;

namespace {

MeanMatrix as_means(const Matrix& m) { return MeanMatrix(m); }

py::dict run_to_dict(const RunResult& r) {
  py::dict out;
  out["recommended"] = r.recommended;
  out["total_samples"] = r.total_samples;
  out["rounds"] = r.rounds;
  out["correct"] = r.correct;
  py::list trace;
  for (const auto& rec : r.trace) {
    py::dict d;
    d["round"] = rec.round;
    d["active"] = rec.active;
    d["accepted"] = rec.accepted;
    d["rejected"] = rec.rejected;
    d["h_r"] = rec.h_r;
    d["budget"] = rec.budget;
    d["eps_r"] = rec.eps_r;
    d["delta_r"] = rec.delta_r;
    d["empirical_pareto"] = rec.empirical_pareto;
    d["empirical_gap"] = rec.empirical_gap;
    trace.append(d);
  }
  out["trace"] = trace;
  return out;
}

}  // namespace

PYBIND11_MODULE(_linpsi, m) {
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DegenerateInstance>(m, "DegenerateInstance", base.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", base.ptr());
  py::register_exception<BudgetTooSmall>(m, "BudgetTooSmall", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<InternalError>(m, "InternalError", base.ptr());

  m.def(
      "pareto_set",
      [](const Matrix& means, bool strict) {
        return pareto_set(as_means(means), strict ? Dominance::strict : Dominance::weak);
      },
      py::arg("means"), py::arg("strict") = false);

  m.def(
      "true_gaps",
      [](const Matrix& means) {
        const GapProfile g = true_gaps(as_means(means));
        py::dict out;
        out["pareto"] = g.pareto_arms();
        out["gap"] = g.gap;
        out["delta_star"] = g.delta_star;
        out["delta_opt"] = g.delta_opt;
        out["degenerate"] = g.degenerate;
        return out;
      },
      py::arg("means"));

  m.def(
      "complexities",
      [](std::vector<double> gaps, std::size_t h) {
        const ComplexityMeasures c = complexities(std::move(gaps), h);
        py::dict out;
        out["h1"] = c.h1;
        out["h2"] = c.h2;
        out["h1_lin"] = c.h1_lin;
        out["h2_lin"] = c.h2_lin;
        return out;
      },
      py::arg("gaps"), py::arg("h"));

  m.def(
      "g_optimal_design",
      [](const Matrix& features, double tol, int max_iter) {
        const SubspaceBasis basis = subspace_basis(features);
        DesignOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        const Design d = g_optimal_design(transform_features(features, basis), opts);
        py::dict out;
        out["h_s"] = basis.rank();
        out["weights"] = d.weights;
        out["value"] = d.value;
        out["iterations"] = d.iterations;
        return out;
      },
      py::arg("features"), py::arg("tol") = 1e-3, py::arg("max_iter") = 10000);

  m.def(
      "round_design",
      [](const Vector& weights, const Matrix& features, Count n, double kappa) {
        const SubspaceBasis basis = subspace_basis(features);
        const Matrix xt = transform_features(features, basis);
        Design d;
        d.weights = weights;
        d.value = design_value(weights, xt);
        const IntegerAllocation a = round_design(d, xt, n, kappa);
        py::dict out;
        out["counts"] = a.counts;
        out["value"] = a.value;
        out["bound"] = (1 + 6 * kappa) * double(basis.rank()) / double(n);
        return out;
      },
      py::arg("weights"), py::arg("features"), py::arg("n"), py::arg("kappa"));

  m.def("apportion", &apportion, py::arg("weights"), py::arg("n"));
  m.def("min_rounding_budget", &min_rounding_budget, py::arg("h_s"), py::arg("kappa"));

  py::class_<Instance>(m, "Instance")
      .def_static("linear", py::overload_cast<Matrix, Matrix, double>(&Instance::linear),
                  py::arg("features"), py::arg("theta"), py::arg("sigma") = 1.0)
      .def_static("linear_cov", py::overload_cast<Matrix, Matrix, Matrix>(&Instance::linear),
                  py::arg("features"), py::arg("theta"), py::arg("covariance"))
      .def_static("fixed_means", &Instance::fixed_means, py::arg("features"), py::arg("means"),
                  py::arg("sigma") = 1.0)
      .def_property_readonly("arms", &Instance::arms)
      .def_property_readonly("dim", &Instance::dim)
      .def_property_readonly("objectives", &Instance::objectives)
      .def_property_readonly("features", &Instance::features)
      .def_property_readonly("means", [](const Instance& i) { return i.means().values(); })
      .def_property_readonly("sigma", &Instance::sigma)
      .def("unstructured", &unstructured)
      .def("to_csv", [](const Instance& i) {
        std::ostringstream out;
        write_instance(out, i);
        return out.str();
      });

  m.def(
      "make_synthetic_family",
      [](std::size_t h, std::size_t d, std::size_t k, std::uint64_t seed, double sigma) {
        SyntheticOptions opts;
        opts.sigma = sigma;
        return make_synthetic_family(h, d, k, seed, opts);
      },
      py::arg("h"), py::arg("d"), py::arg("k"), py::arg("seed"), py::arg("sigma") = 1.0);

  m.def(
      "load_instance",
      [](const std::string& path, bool linearize, bool normalize, double sigma) {
        LoadOptions opts;
        opts.mode = linearize ? LoadMode::linearize : LoadMode::raw;
        opts.normalize = normalize;
        opts.sigma = sigma;
        return load_instance(path, opts);
      },
      py::arg("path"), py::arg("linearize") = true, py::arg("normalize") = true,
      py::arg("sigma") = 1.0);

  m.def(
      "gege_fixed_budget",
      [](const Instance& inst, Count budget, std::uint64_t seed, std::uint64_t stream) {
        RngStream rng(seed, stream);
        return run_to_dict(gege_fixed_budget(inst, budget, rng));
      },
      py::arg("instance"), py::arg("budget"), py::arg("seed") = 0, py::arg("stream") = 0);

  m.def(
      "gege_fixed_confidence",
      [](const Instance& inst, double delta, double epsilon, std::uint64_t seed, std::uint64_t stream) {
        RngStream rng(seed, stream);
        FixedConfidenceOptions opts;
        opts.epsilon = epsilon;
        return run_to_dict(gege_fixed_confidence(inst, delta, rng, opts));
      },
      py::arg("instance"), py::arg("delta"), py::arg("epsilon") = 0.0, py::arg("seed") = 0,
      py::arg("stream") = 0);

  m.def(
      "uniform_fixed_budget",
      [](const Instance& inst, Count budget, std::uint64_t seed, std::uint64_t stream) {
        RngStream rng(seed, stream);
        return run_to_dict(uniform_fixed_budget(inst, budget, rng));
      },
      py::arg("instance"), py::arg("budget"), py::arg("seed") = 0, py::arg("stream") = 0);

  m.def("min_fixed_budget", &min_fixed_budget, py::arg("instance"));
}
