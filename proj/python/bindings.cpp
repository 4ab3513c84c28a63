#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "mkrf/commands.hpp"
#include "mkrf/config.hpp"
#include "mkrf/errors.hpp"
#include "mkrf/flow.hpp"
#include "mkrf/functionals.hpp"
#include "mkrf/io.hpp"
#include "mkrf/potentials.hpp"
#include "mkrf/soliton.hpp"

namespace py = pybind11;
using namespace mkrf;

namespace {

FlowConfig config_from(const py::dict& kv) {
    FlowConfig cfg;
    for (const auto& [k, v] : kv) apply_config_key(cfg, py::str(k), py::str(v));
    validate(cfg);
    return cfg;
}

// trace records as a dict of column name -> list of floats
py::dict columns(const FlowTrace& tr) {
    py::dict out;
    auto col = [&](const char* name, double DiagnosticsRecord::*m) {
        std::vector<double> v;
        v.reserve(tr.records.size());
        for (const auto& r : tr.records) v.push_back(r.*m);
        out[name] = v;
    };
    col("t", &DiagnosticsRecord::t);
    col("Y_X", &DiagnosticsRecord::Y_X);
    col("b", &DiagnosticsRecord::b);
    col("mu_X", &DiagnosticsRecord::mu_X);
    col("F_X", &DiagnosticsRecord::F_X);
    col("res_C0", &DiagnosticsRecord::res_C0);
    col("res_L2", &DiagnosticsRecord::res_L2);
    col("grad_u_C0", &DiagnosticsRecord::grad_u_C0);
    col("lap_u_C0", &DiagnosticsRecord::lap_u_C0);
    col("phidot_C0", &DiagnosticsRecord::phidot_C0);
    col("X2_max", &DiagnosticsRecord::X2_max);
    col("h_min", &DiagnosticsRecord::h_min);
    col("h_max", &DiagnosticsRecord::h_max);
    col("lambda", &DiagnosticsRecord::lambda);
    col("lambda_X", &DiagnosticsRecord::lambda_X);
    col("theta_min", &DiagnosticsRecord::theta_min);
    col("theta_max", &DiagnosticsRecord::theta_max);
    return out;
}

py::dict state_fields(const MetricState& s, double c) {
    const VectorFieldSpec X{c};
    const auto p = modified_potential(s, X);
    py::dict d;
    d["tau"] = Field(s.background().tau);
    d["psi"] = s.psi();
    d["h"] = s.volume_ratio();
    d["R"] = s.scalar_curvature();
    d["theta"] = p.theta;
    d["f"] = p.f;
    d["u"] = p.u;
    d["b"] = p.b;
    d["Y_X"] = y_x(s, X, p);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<DegenerateMetric>(m, "DegenerateMetric", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

    m.attr("__version__") = MKRF_VERSION;
    m.attr("trace_header") = trace_header;

    py::class_<FlowTrace>(m, "FlowTrace")
        .def_readonly("background", &FlowTrace::background)
        .def_readonly("n", &FlowTrace::n)
        .def_readonly("c", &FlowTrace::c)
        .def_readonly("volume", &FlowTrace::volume)
        .def_readonly("grid", &FlowTrace::grid)
        .def_readonly("horizon", &FlowTrace::horizon)
        .def_property_readonly("termination", [](const FlowTrace& t) { return to_string(t.termination); })
        .def_property_readonly("exit_code", [](const FlowTrace& t) { return exit_code(t.termination); })
        .def_readonly("message", &FlowTrace::message)
        .def("__len__", [](const FlowTrace& t) { return t.records.size(); })
        .def("columns", &columns);

    m.def("config_keys", &config_keys);
    m.def("render_config", [](const py::dict& kv) { return render_config(config_from(kv)); }, py::arg("settings"));

    m.def(
        "run",
        [](const py::dict& kv) {
            const FlowConfig cfg = resolve_config(config_from(kv));
            py::gil_scoped_release nogil;
            return run(cfg);
        },
        py::arg("settings") = py::dict(), "Run the flow in memory; keys follow the config file.");

    m.def(
        "simulate",
        [](const py::dict& kv, bool snapshots) {
            const FlowConfig cfg = config_from(kv);
            SimulationOutcome out;
            {
                py::gil_scoped_release nogil;
                out = simulate(cfg, snapshots);
            }
            return py::make_tuple(out.trace, out.outputs, out.exit_status);
        },
        py::arg("settings"), py::arg("snapshots") = true);

    m.def("read_trace", &read_trace, py::arg("path"));

    m.def("classify", [](const FlowTrace& tr) {
        const auto c = classify_run(tr);
        py::dict d;
        d["verdict"] = to_string(c.verdict);
        d["integrability"] = c.integrability.pass;
        d["bounded_phi"] = c.bounded_phi.pass;
        d["exponential"] = c.exponential.pass;
        d["y_floor"] = c.floor_Y;
        d["note"] = c.note;
        return d;
    });

    m.def(
        "state",
        [](const std::string& background, std::size_t nodes, std::optional<Field> psi, double c) {
            const auto bg = make_background(parse_background(background), nodes);
            const MetricState s(bg, psi ? *psi : Field(Field::Zero(static_cast<Eigen::Index>(bg->size()))));
            return state_fields(s, c);
        },
        py::arg("background"), py::arg("nodes") = 129, py::arg("psi") = std::nullopt, py::arg("c") = 0.0);

    m.def(
        "soliton_constant",
        [](const std::string& background, std::size_t nodes) {
            return find_soliton_constant(make_background(parse_background(background), nodes));
        },
        py::arg("background"), py::arg("nodes") = 129);

    m.def(
        "soliton",
        [](const std::string& background, double c, std::size_t nodes) -> py::object {
            const auto r = stationary_solve(make_background(parse_background(background), nodes), c);
            if (const auto* no = std::get_if<NoSoliton>(&r)) {
                py::dict d;
                d["found"] = false;
                d["reason"] = no->reason;
                d["best_residual"] = no->best_residual;
                return d;
            }
            const auto& sol = std::get<SolitonSolution>(r);
            py::dict d = state_fields(sol.state, c);
            d["found"] = true;
            d["residual"] = sol.residual;
            return d;
        },
        py::arg("background"), py::arg("c"), py::arg("nodes") = 129);

    m.def(
        "cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "mkrf");
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Run a command line; returns the exit code.");
}
