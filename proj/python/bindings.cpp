#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liqimpact/cli.hpp"
#include "liqimpact/compare.hpp"
#include "liqimpact/errors.hpp"
#include "liqimpact/estimation.hpp"
#include "liqimpact/impact.hpp"
#include "liqimpact/ingest.hpp"
#include "liqimpact/sde.hpp"

namespace py = pybind11;
using namespace liqimpact;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

impact::ImpactParams params_of(const std::string& model, const py::dict& kw) {
    switch (impact::impact_model_from_string(model)) {
        case impact::ImpactModel::sshape:
            return impact::SShapeParams{kw["ell"].cast<double>(), kw["p"].cast<double>(), kw["q"].cast<double>()};
        case impact::ImpactModel::linear: return impact::LinearParams{kw["alpha"].cast<double>()};
        case impact::ImpactModel::sqrt: return impact::SqrtParams{kw["alpha"].cast<double>()};
    }
    throw DomainError("unknown model");
}

est::RegressionPanel panel_of(const std::vector<double>& r, const std::vector<double>& x,
                              const std::vector<double>& x_prev) {
    if (r.size() != x.size() || r.size() != x_prev.size()) throw DomainError("r, x and x_prev differ in length");
    est::RegressionPanel panel;
    for (std::size_t i = 0; i < r.size(); ++i) panel.obs.push_back({r[i], x[i], x_prev[i]});
    return panel;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Order-flow price impact models, simulation and estimation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", base.ptr());

    py::class_<impact::SShapeParams>(m, "SShapeParams")
        .def(py::init<double, double, double>(), py::arg("ell"), py::arg("p"), py::arg("q"))
        .def_readwrite("ell", &impact::SShapeParams::ell)
        .def_readwrite("p", &impact::SShapeParams::p)
        .def_readwrite("q", &impact::SShapeParams::q)
        .def("__repr__", [](const impact::SShapeParams& s) {
            return "SShapeParams(ell=" + std::to_string(s.ell) + ", p=" + std::to_string(s.p) +
                   ", q=" + std::to_string(s.q) + ")";
        });

    m.def("f_sshape", py::vectorize([](double x, double ell, double p, double q) {
              return impact::f_sshape(x, {ell, p, q});
          }),
          py::arg("x"), py::arg("ell"), py::arg("p"), py::arg("q"));
    m.def("g_sshape", py::vectorize([](double x, double ell, double p, double q) {
              return impact::g_sshape(x, {ell, p, q});
          }),
          py::arg("x"), py::arg("ell"), py::arg("p"), py::arg("q"));
    m.def("inflection_point", [](double p, double q) { return impact::inflection_point({1.0, p, q}); },
          py::arg("p"), py::arg("q"));
    m.def("curvature_root", [](const impact::SShapeParams& s) { return impact::curvature_root(s); });
    m.def("feasibility_margin", [](const impact::SShapeParams& s) { return impact::feasibility_margin(s); });
    m.def("is_feasible", [](const impact::SShapeParams& s, double floor) { return impact::is_feasible(s, floor); },
          py::arg("params"), py::arg("margin_floor") = 0.0);
    m.def("linear_alpha_from_ps", [](double p, double s) {
        const auto r = impact::linear_alpha_from_ps(p, s);
        return py::make_tuple(r.alpha, r.beta);
    });
    m.def("impact_f", [](const std::vector<double>& x, const std::string& model, const py::kwargs& kw) {
              const auto params = params_of(model, kw);
              impact::validate(params);
              std::vector<double> out;
              for (double v : x) out.push_back(impact::impact_f(v, params));
              return out;
          },
          py::arg("x"), py::arg("model"));

    m.def("synth_panel",
          [](double a, const std::string& model, const py::dict& impact_kw, double c, double mean, double eta,
             double dt, int n_days, int bars_per_day, double noise_sd, std::uint64_t seed) {
              const auto panel = sim::synth_regression_panel(a, params_of(model, impact_kw), {c, mean, eta, dt},
                                                             n_days, bars_per_day, noise_sd, seed);
              py::dict d;
              std::vector<int> day, bar;
              std::vector<double> x, r;
              for (const auto& row : panel.rows) {
                  day.push_back(row.day);
                  bar.push_back(row.bar);
                  x.push_back(row.x);
                  r.push_back(row.r);
              }
              d["day"] = day;
              d["bar"] = bar;
              d["x"] = x;
              d["r"] = r;
              return d;
          },
          py::arg("a"), py::arg("model"), py::arg("impact"), py::arg("c"), py::arg("m"), py::arg("eta"),
          py::arg("dt") = 1.0, py::arg("n_days") = 1, py::arg("bars_per_day") = 360, py::arg("noise_sd") = 0.0,
          py::arg("seed") = 0);

    m.def("fit",
          [](const std::vector<double>& r, const std::vector<double>& x, const std::vector<double>& x_prev,
             const std::string& model, unsigned jobs) {
              est::SShapeOptions opts;
              opts.jobs = jobs;
              const auto panel = panel_of(r, x, x_prev);
              est::FitResult fit;
              {
                  py::gil_scoped_release release;
                  fit = est::fit_model(panel, impact::impact_model_from_string(model), opts);
              }
              return to_py(est::to_json(fit));
          },
          py::arg("r"), py::arg("x"), py::arg("x_prev"), py::arg("model") = "sshape", py::arg("jobs") = 0);

    m.def("estimate_ou",
          [](const std::vector<std::vector<double>>& segments, double dt) {
              return to_py(est::to_json(est::estimate_ou(segments, dt)));
          },
          py::arg("segments"), py::arg("dt") = 1.0);

    m.def("bars_from_ticks",
          [](const std::string& text, const std::string& start, const std::string& end, int bar_seconds,
             double tick_size) {
              ingest::SessionSpec s;
              s.start_us = ingest::parse_clock(start);
              s.end_us = ingest::parse_clock(end);
              s.bar_seconds = bar_seconds;
              s.tick_size = tick_size;
              s.validate();
              return ingest::bars_csv(ingest::build_bars(ingest::parse_ticks(text), s));
          },
          py::arg("text"), py::arg("session_start") = "09:00", py::arg("session_end") = "15:00",
          py::arg("bar_seconds") = 60, py::arg("tick_size") = 1e-4);

    m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        return to_py(cmp::to_json(cmp::paired_t_test(a, b)));
    });
    m.def("descriptives", [](const std::vector<double>& v) { return to_py(cmp::to_json(cmp::descriptives(v))); });

    m.def("run_cli", [](std::vector<std::string> args) {
              args.insert(args.begin(), "liqimpact");
              return cli::run(args);
          },
          py::arg("args"));
}
