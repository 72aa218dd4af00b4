// Python bindings. States and phase distributions are passed in their text forms.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spreadchan/error.hpp"
#include "spreadchan/estimation.hpp"
#include "spreadchan/fisher.hpp"
#include "spreadchan/measurement.hpp"
#include "spreadchan/wigner.hpp"

namespace py = pybind11;
using namespace spreadchan;

namespace {

PhaseDistribution phases_of(const std::string &text) {
    return PhaseDistribution::parse(text);
}

py::dict report_dict(const FisherReport &r) {
    py::dict d;
    d["value"] = r.value;
    d["method"] = to_string(r.method);
    d["derivative_step"] = r.derivative_step;
    d["leakage"] = r.leakage;
    d["excluded_terms"] = r.excluded_terms;
    d["degenerate"] = r.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Displacement-channel metrology core";
    m.attr("__version__") = SPREADCHAN_VERSION;

    static py::exception<Error> error_type(m, "SpreadchanError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error &e) {
            const std::string message = std::string(to_string(e.kind())) + ": " + e.what();
            if (e.kind() == ErrorKind::parse || e.kind() == ErrorKind::domain) {
                PyErr_SetString(PyExc_ValueError, message.c_str());
            } else {
                py::set_error(error_type, message.c_str());
            }
        }
    });

    m.def("canonical_state", [](const std::string &s) { return StateSpec::parse(s).to_string(); }, py::arg("state"));
    m.def("nominal_energy", [](const std::string &s) { return StateSpec::parse(s).nominal_energy(); },
          py::arg("state"));
    m.def("auto_dimension", [](const std::string &s, double alpha_max) {
        return auto_dimension(StateSpec::parse(s), alpha_max).value();
    }, py::arg("state"), py::arg("alpha_max"));
    m.def("fock_amplitudes", [](const std::string &s, int dim) {
        const auto psi = build_pure_state(StateSpec::parse(s), FockDimension(dim));
        return std::vector<std::complex<double>>(psi.amplitudes().begin(), psi.amplitudes().end());
    }, py::arg("state"), py::arg("dim"));

    m.def("p0", [](const std::string &s, double alpha, const std::string &phases, std::optional<int> dim) {
        NumericOptions opt;
        opt.dim = dim;
        return p0_numeric(StateSpec::parse(s), alpha, phases_of(phases), opt);
    }, py::arg("state"), py::arg("alpha"), py::arg("phases") = "uniform", py::arg("dim") = py::none());
    m.def("p0_squeezed_closed", &p0_squeezed_closed, py::arg("alpha"), py::arg("r"));
    m.def("p0_fock_closed", &p0_fock_closed, py::arg("alpha"), py::arg("n"));
    m.def("p0_coherent", &p0_coherent, py::arg("alpha"));

    m.def("avg_qfi", [](const std::string &s, double alpha, const std::string &phases, int dim) {
        const auto psi = build_pure_state(StateSpec::parse(s), FockDimension(dim));
        return report_dict(avg_qfi(psi, alpha, phases_of(phases)));
    }, py::arg("state"), py::arg("alpha"), py::arg("phases") = "uniform", py::arg("dim") = 128);
    m.def("qfi_bound", &qfi_bound, py::arg("mean_photons"));
    m.def("cfi_self_projection", [](const std::string &s, double alpha, const std::string &phases, double eps) {
        return report_dict(cfi_self_projection(StateSpec::parse(s), phases_of(phases), alpha, eps));
    }, py::arg("state"), py::arg("alpha"), py::arg("phases") = "uniform", py::arg("eps") = 0.0);
    m.def("cfi_quadrature", [](const std::string &s, double alpha, const std::string &phases) {
        return report_dict(cfi_quadrature(StateSpec::parse(s), alpha, phases_of(phases)));
    }, py::arg("state"), py::arg("alpha"), py::arg("phases") = "uniform");
    m.def("quadrature_moments_closed", [](double r, double alpha) {
        const auto q = quadrature_moments_closed(r, alpha);
        py::dict d;
        d["mean_a"] = q.mean_a;
        d["var_a_within_phase"] = q.var_a_within_phase;
        d["var_a_total"] = q.var_a_total;
        d["var_estimate"] = q.var_estimate;
        d["var_estimate_total"] = q.var_estimate_total;
        return d;
    }, py::arg("r"), py::arg("alpha"));

    m.def("simulate", [](const std::string &s, double alpha, std::int64_t repetitions, std::uint64_t seed,
                         const std::string &phases, double eps, bool randomize_rotation, std::uint64_t trial) {
        ExperimentConfig c;
        c.probe = StateSpec::parse(s);
        c.phases = phases_of(phases);
        c.alpha_true = alpha;
        c.repetitions = repetitions;
        c.seed = seed;
        c.dark_noise = eps;
        c.randomize_rotation = randomize_rotation;
        c.trial = trial;
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = simulate(c);
        }
        py::dict d;
        d["m0"] = r.m0;
        d["m1"] = r.m1;
        d["alpha_hat"] = r.alpha_hat;
        d["crb_sigma"] = r.crb_sigma;
        d["boundary"] = r.boundary;
        d["ambiguous"] = r.ambiguous;
        return d;
    }, py::arg("state"), py::arg("alpha"), py::arg("repetitions"), py::arg("seed"), py::arg("phases") = "uniform",
       py::arg("eps") = 0.0, py::arg("randomize_rotation") = false, py::arg("trial") = 0);

    m.def("rmse", [](const std::vector<std::string> &states, const std::vector<double> &alphas,
                     const std::vector<std::int64_t> &repetitions, int trials, std::uint64_t seed,
                     const std::string &phases, double eps) {
        std::vector<StateSpec> specs;
        for (const auto &s : states) {
            specs.push_back(StateSpec::parse(s));
        }
        const auto dist = phases_of(phases);
        std::vector<RmseRow> rows;
        {
            py::gil_scoped_release release;
            rows = rmse_sweep(specs, alphas, repetitions, dist, trials, seed, eps);
        }
        py::list out;
        for (const auto &r : rows) {
            py::dict d;
            d["state_label"] = r.label;
            d["alpha"] = r.alpha;
            d["repetitions"] = r.repetitions;
            d["trials"] = r.trials;
            d["rmse"] = r.rmse;
            d["crb"] = r.crb;
            d["ratio"] = r.ratio;
            d["mean_estimate"] = r.mean_estimate;
            d["ambiguous"] = r.ambiguous;
            d["boundary"] = r.boundary;
            d["squared_errors"] = r.squared_errors;
            out.append(d);
        }
        return out;
    }, py::arg("states"), py::arg("alphas"), py::arg("repetitions"), py::arg("trials") = 500, py::arg("seed") = 0,
       py::arg("phases") = "uniform", py::arg("eps") = 0.0);

    m.def("welch_test", [](const std::vector<double> &a, const std::vector<double> &b) {
        const auto w = welch_test(a, b);
        return py::make_tuple(w.t, w.dof, w.p_value);
    }, py::arg("a"), py::arg("b"));

    m.def("wigner", [](const std::string &s, std::optional<double> half_width, int resolution) {
        GridSpec g;
        g.half_width = half_width;
        g.resolution = resolution;
        const auto grid = wigner_grid(StateSpec::parse(s), g);
        py::array_t<double> values({grid.values.rows(), grid.values.cols()});
        auto v = values.mutable_unchecked<2>();
        for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
            for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
                v(i, j) = grid.values(i, j);
            }
        }
        py::dict d;
        d["x"] = py::array_t<double>(static_cast<py::ssize_t>(grid.x.size()), grid.x.data());
        d["p"] = py::array_t<double>(static_cast<py::ssize_t>(grid.p.size()), grid.p.data());
        d["W"] = values;
        d["integral"] = grid.integral();
        d["warnings"] = grid.warnings;
        return d;
    }, py::arg("state"), py::arg("half_width") = py::none(), py::arg("resolution") = 201);
}
