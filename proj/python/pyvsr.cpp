#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>
#include <string>

#include "vsr/analysis.hpp"
#include "vsr/errors.hpp"
#include "vsr/io.hpp"
#include "vsr/oracle.hpp"
#include "vsr/scenario.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

// Undefined samples become NaN so the arrays line up with `t`.
py::array_t<double> track_array(const std::vector<double>& v, std::size_t defined_from) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    auto w = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < v.size(); ++i) {
        w(static_cast<py::ssize_t>(i)) = i < defined_from ? std::numeric_limits<double>::quiet_NaN() : v[i];
    }
    return out;
}

vsr::SolverConfig make_solver(double rel_tol, double abs_tol, std::optional<double> t_max,
                              double completion_epsilon, std::size_t samples, bool raw) {
    vsr::SolverConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.t_max = t_max;
    cfg.completion_epsilon = completion_epsilon;
    cfg.sample_count = samples;
    cfg.raw_eq2_intensity = raw;
    return cfg;
}

py::object json_to_py(const nlohmann::json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

py::dict simulate(int n, double gamma1, double gamma2, const std::string& init, double rel_tol, double abs_tol,
                  std::optional<double> t_max, double completion_epsilon, std::size_t samples, bool raw) {
    const vsr::InitialKind kind = vsr::parse_initial_kind(init);
    const vsr::SolverConfig cfg = make_solver(rel_tol, abs_tol, t_max, completion_epsilon, samples, raw);
    vsr::RunResult res;
    {
        py::gil_scoped_release release;
        res = vsr::run_single({gamma1, gamma2}, n, kind, cfg);
    }
    const auto& s = res.series;
    py::dict d;
    d["t"] = to_array(s.times);
    d["I1"] = to_array(s.modes[0].intensity);
    d["I2"] = to_array(s.modes[1].intensity);
    d["A1"] = to_array(s.modes[0].area);
    d["A2"] = to_array(s.modes[1].area);
    d["tau1"] = track_array(res.track.modes[0].tau, res.track.modes[0].defined_from);
    d["tau2"] = track_array(res.track.modes[1].tau, res.track.modes[1].defined_from);
    d["sigma1"] = track_array(res.track.modes[0].sigma, res.track.modes[0].defined_from);
    d["sigma2"] = track_array(res.track.modes[1].sigma, res.track.modes[1].defined_from);
    d["P_ground"] = to_array(s.ground_mass);
    d["total_mass"] = to_array(s.total_mass);
    d["final_distribution"] = to_array(s.final_distribution);
    d["t_end"] = s.t_end;
    d["completed"] = s.completed;
    d["accepted_steps"] = s.stats.accepted_steps;
    d["record"] = json_to_py(vsr::io::to_json(res.record));
    return d;
}

py::dict synthesis(int n, double gamma1, double gamma2, double fraction, double rel_tol, double abs_tol) {
    vsr::SolverConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    vsr::SynthesisReport rep;
    {
        py::gil_scoped_release release;
        if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
            throw vsr::ValidationError("synthesis needs gamma1 > 0 and gamma2 > 0");
        }
        const auto res = vsr::run_single({gamma1, gamma2}, n, vsr::InitialKind::v_standard, cfg);
        rep = vsr::synthesis_report(res.series, fraction);
    }
    return json_to_py(vsr::io::to_json(rep));
}

py::dict verify(int max_n, double tolerance, double perturb, std::size_t probes) {
    vsr::oracle::BatteryOptions opt;
    opt.max_n = max_n;
    opt.tolerance = tolerance;
    opt.perturb = perturb;
    opt.probes = probes;
    vsr::oracle::BatteryReport rep;
    {
        py::gil_scoped_release release;
        rep = vsr::oracle::run_battery(opt);
    }
    py::list cases;
    for (const auto& c : rep.cases) {
        py::dict row;
        row["n_half"] = c.n_half;
        row["gamma1"] = c.rates.gamma1;
        row["gamma2"] = c.rates.gamma2;
        row["max_deviation"] = c.max_deviation;
        row["pass"] = c.pass;
        cases.append(row);
    }
    py::dict d;
    d["cases"] = cases;
    d["closed_form_vs_dense"] = rep.closed_form_vs_dense;
    d["observables_vs_closed_form"] = rep.observables_vs_closed_form;
    d["pass"] = rep.pass;
    return d;
}

py::dict two_atom(double gamma1, double gamma2, double t) {
    const auto sol = vsr::oracle::two_atom_closed_form(gamma1, gamma2, t);
    py::dict d;
    d["p12"] = sol.p12;
    d["p11"] = sol.p11;
    d["p01"] = sol.p01;
    d["p00"] = sol.p00;
    d["I1"] = sol.intensity1;
    d["I2"] = sol.intensity2;
    return d;
}

}  // namespace

PYBIND11_MODULE(pyvsr, m) {
    m.doc() = "Exact two-mode superradiance rate equations for 2N V-type atoms";

    py::register_exception<vsr::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<vsr::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<vsr::IoError>(m, "IoError", PyExc_OSError);

    m.def("dimension", &vsr::dimension, py::arg("n"), "Number of (n, m) states for 2N atoms");
    m.def(
        "index_of",
        [](int n_half, int n, int m_) { return vsr::StateSpace(n_half).index_of(n, m_); },
        py::arg("n_half"), py::arg("n"), py::arg("m"));
    m.def(
        "state_of",
        [](int n_half, std::size_t index) {
            const auto occ = vsr::StateSpace(n_half).state_of(index);
            return py::make_tuple(occ.n, occ.m);
        },
        py::arg("n_half"), py::arg("index"));

    m.def("dicke_delay", &vsr::dicke_delay, py::arg("n"));
    m.def("dicke_sigma", &vsr::dicke_sigma, py::arg("n"));

    m.def("simulate", &simulate, py::arg("n"), py::arg("gamma1") = 1.0, py::arg("gamma2") = 0.1,
          py::arg("init") = "v-standard", py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-12,
          py::arg("t_max") = py::none(), py::arg("completion_epsilon") = 1e-6, py::arg("samples") = 2000,
          py::arg("raw_eq2_intensity") = false,
          "Integrate one run; returns sampled observables as numpy arrays plus the per-run record");
    m.def("synthesis", &synthesis, py::arg("n"), py::arg("gamma1") = 1.0, py::arg("gamma2") = 0.1,
          py::arg("completion_fraction") = 0.9, py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-12);
    m.def("verify", &verify, py::arg("max_n") = 5, py::arg("tolerance") = 1e-8, py::arg("perturb") = 0.0,
          py::arg("probes") = 20, "Production integrator against the dense matrix-exponential oracle");
    m.def("two_atom_closed_form", &two_atom, py::arg("gamma1"), py::arg("gamma2"), py::arg("t"));

    m.def(
        "fwhm",
        [](const std::vector<double>& t, const std::vector<double>& y) { return vsr::fwhm(t, y); },
        py::arg("t"), py::arg("values"));
    m.def(
        "peak",
        [](const std::vector<double>& t, const std::vector<double>& y) {
            const auto p = vsr::peak_extract(t, y);
            return py::make_tuple(p.time, p.value, p.at_boundary);
        },
        py::arg("t"), py::arg("values"), "Refined maximum as (time, value, at_boundary)");
}
