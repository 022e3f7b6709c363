// Python bindings. Cubes cross the boundary as float64 arrays of shape
// (n3, n1, n2), which is the library's band-sequential memory order.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "geosstv/io.hpp"
#include "geosstv/linops.hpp"
#include "geosstv/metrics.hpp"
#include "geosstv/noise.hpp"
#include "geosstv/parallel.hpp"
#include "geosstv/prox.hpp"
#include "geosstv/solver.hpp"

namespace py = pybind11;
using namespace geosstv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

HsCube to_cube(const Array& a) {
    if (a.ndim() != 3) {
        throw py::value_error("expected an array of shape (n3, n1, n2)");
    }
    const CubeShape shape(a.shape(1), a.shape(2), a.shape(0));
    std::vector<double> data(a.data(), a.data() + a.size());
    return HsCube(shape, std::move(data));
}

Array to_array(const HsCube& c) {
    const CubeShape& s = c.shape();
    Array out({s.n3(), s.n1(), s.n2()});
    std::memcpy(out.mutable_data(), c.values().data(), c.size() * sizeof(double));
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(v.size());
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

std::span<const double> flat(const Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["rel_change_history"] = r.rel_change_history;
    d["objective_history"] = r.objective_history;
    d["constraint_residuals"] = r.constraint_residuals;
    d["raw_constraint_residuals"] = r.raw_constraint_residuals;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GeoSSTV hyperspectral denoising and destriping";
    m.attr("__version__") = std::string(version());

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def(py::init<>())
        .def_readwrite("sigma", &NoiseSpec::sigma)
        .def_readwrite("p_sparse", &NoiseSpec::p_sparse)
        .def_readwrite("p_stripe", &NoiseSpec::p_stripe)
        .def_readwrite("stripe_lo", &NoiseSpec::stripe_lo)
        .def_readwrite("stripe_hi", &NoiseSpec::stripe_hi)
        .def_readwrite("p_dead", &NoiseSpec::p_dead)
        .def_readwrite("dead_width_min", &NoiseSpec::dead_width_min)
        .def_readwrite("dead_width_max", &NoiseSpec::dead_width_max)
        .def_readwrite("seed", &NoiseSpec::seed)
        .def("validate", &NoiseSpec::validate)
        .def("__eq__", [](const NoiseSpec& a, const NoiseSpec& b) { return a == b; });

    py::class_<RadiusSet>(m, "RadiusSet")
        .def_readonly("alpha", &RadiusSet::alpha)
        .def_readonly("beta", &RadiusSet::beta)
        .def_readonly("epsilon", &RadiusSet::epsilon)
        .def_readonly("rho", &RadiusSet::rho)
        .def_readonly("c_dead", &RadiusSet::c_dead);

    py::class_<StepSizes>(m, "StepSizes")
        .def_readonly("u", &StepSizes::u)
        .def_readonly("w1", &StepSizes::w1)
        .def_readonly("w2", &StepSizes::w2)
        .def_readonly("s", &StepSizes::s)
        .def_readonly("t", &StepSizes::t)
        .def_readonly("y1", &StepSizes::y1)
        .def_readonly("y2", &StepSizes::y2)
        .def_readonly("y3", &StepSizes::y3)
        .def_readonly("y4", &StepSizes::y4);

    m.def("case_spec", &case_spec, py::arg("case_id"));
    m.def("rho_for_case", &rho_for_case, py::arg("case_id"));
    m.def("deadline_coverage", &deadline_coverage, py::arg("mean_width"), py::arg("p_dead"));
    m.def("default_step_sizes", &default_step_sizes);
    m.def("set_thread_count", &set_thread_count, py::arg("threads"));

    m.def(
        "simulate",
        [](const Array& clean, const NoiseSpec& spec) {
            const SimulationOutput out = simulate(to_cube(clean), spec);
            py::dict d;
            d["observed"] = to_array(out.observed);
            d["sparse"] = to_array(out.sparse_truth);
            d["stripe"] = to_array(out.stripe_truth);
            d["gaussian"] = to_array(out.gaussian_truth);
            return d;
        },
        py::arg("clean"), py::arg("spec"),
        "Returns a dict of observed, sparse, stripe and gaussian arrays.");

    m.def(
        "compute_radii",
        [](double observed_mean, py::tuple shape, const NoiseSpec& spec, double rho) {
            if (shape.size() != 3) throw py::value_error("shape is (n3, n1, n2)");
            const CubeShape s(shape[1].cast<std::size_t>(), shape[2].cast<std::size_t>(),
                              shape[0].cast<std::size_t>());
            return compute_radii(observed_mean, s, spec, rho);
        },
        py::arg("observed_mean"), py::arg("shape"), py::arg("spec"), py::arg("rho"));

    m.def(
        "denoise",
        [](const Array& observed, double alpha, double beta, double epsilon, double omega,
           double mu_min, double mu_max, double tol, std::size_t max_iter, bool restore) {
            ProblemParams p;
            p.observed = to_cube(observed);
            p.alpha = alpha;
            p.beta = beta;
            p.epsilon = epsilon;
            p.omega = omega;
            p.bounds = {mu_min, mu_max};
            SolveOptions o;
            o.tol = tol;
            o.max_iter = max_iter;
            o.restore_feasibility = restore;
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(p, default_step_sizes(), o);
            }
            py::dict d;
            d["u"] = to_array(r.u);
            d["s"] = to_array(r.s);
            d["t"] = to_array(r.t);
            d["report"] = report_dict(r.report);
            return d;
        },
        py::arg("observed"), py::arg("alpha"), py::arg("beta"), py::arg("epsilon"),
        py::arg("omega") = 0.03, py::arg("mu_min") = 0.0, py::arg("mu_max") = 1.0,
        py::arg("tol") = 1e-5, py::arg("max_iter") = 20000, py::arg("restore_feasibility") = true);

    m.def(
        "mpsnr", [](const Array& e, const Array& t) { return mpsnr(to_cube(e), to_cube(t)).mpsnr_db; },
        py::arg("estimate"), py::arg("truth"));
    m.def(
        "mssim", [](const Array& e, const Array& t) { return mssim(to_cube(e), to_cube(t)).mssim; },
        py::arg("estimate"), py::arg("truth"));

    m.def(
        "geosstv_value",
        [](const Array& u, double omega, double tol, std::size_t max_iter) {
            const GeoSSTVValue v = geosstv_value(to_cube(u), omega, tol, max_iter);
            return py::make_tuple(v.value, v.converged);
        },
        py::arg("u"), py::arg("omega"), py::arg("tol") = 1e-9, py::arg("max_iter") = 200000,
        "Returns (value, converged).");

    m.def(
        "estimate_opnorm",
        [](const std::string& op, py::tuple shape, int iters, std::uint64_t seed) {
            const CubeShape s(shape[1].cast<std::size_t>(), shape[2].cast<std::size_t>(),
                              shape[0].cast<std::size_t>());
            return estimate_opnorm(parse_operator(op), s, iters, seed);
        },
        py::arg("op"), py::arg("shape"), py::arg("iters") = 100, py::arg("seed") = 0);

    m.def(
        "apply_operator",
        [](const std::string& op, py::tuple shape, const Array& x, bool adjoint) {
            const CubeShape s(shape[1].cast<std::size_t>(), shape[2].cast<std::size_t>(),
                              shape[0].cast<std::size_t>());
            const Operator o = parse_operator(op);
            return to_array(adjoint ? adjoint_of(o, s, flat(x)) : apply(o, s, flat(x)));
        },
        py::arg("op"), py::arg("shape"), py::arg("x"), py::arg("adjoint") = false,
        "Flat-vector application of a named operator on a cube of the given (n3, n1, n2) shape.");

    m.def(
        "prox_l12",
        [](const Array& x, double gamma, std::size_t block_len) {
            return to_array(prox_l12(flat(x), gamma, block_len));
        },
        py::arg("x"), py::arg("gamma"), py::arg("block_len"));
    m.def(
        "project_l1ball", [](const Array& x, double r) { return to_array(project_l1ball(flat(x), r)); },
        py::arg("x"), py::arg("radius"));
    m.def(
        "project_l2ball",
        [](const Array& x, const Array& c, double r) { return to_array(project_l2ball(flat(x), flat(c), r)); },
        py::arg("x"), py::arg("center"), py::arg("radius"));
    m.def(
        "project_box",
        [](const Array& x, double lo, double hi) { return to_array(project_box(flat(x), {lo, hi})); },
        py::arg("x"), py::arg("mu_min") = 0.0, py::arg("mu_max") = 1.0);

    m.def(
        "read_cube", [](const std::filesystem::path& p) { return to_array(read_cube(p)); }, py::arg("path"));
    m.def(
        "write_cube",
        [](const std::filesystem::path& p, const Array& a, bool float32) {
            write_cube(p, to_cube(a), float32 ? Dtype::Float32 : Dtype::Float64);
        },
        py::arg("path"), py::arg("cube"), py::arg("float32") = false);

    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
}
