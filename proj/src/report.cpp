#include "mkrf/report.hpp"

#include <algorithm>
#include <cmath>

namespace mkrf {

std::vector<SnapshotAudit> audit_snapshots(const FlowTrace& trace) {
    const VectorFieldSpec X{trace.c};
    const auto times = trace.times();
    std::vector<SnapshotAudit> out;
    for (const auto& s : trace.snapshots) {
        SnapshotAudit a;
        a.t = s.time();
        const auto p = modified_potential(s, X);
        const auto b = bochner_terms(s, p.theta, p.u);
        a.bochner = std::abs(b.residual());
        a.bochner_scale = b.scale();
        a.weighted_divergence = std::abs(weighted_divergence_residual(s, X, p.theta, p.u));
        a.divergence_gap = (divergence_X(s, X) - divergence_X_christoffel(s, X)).cwiseAbs().maxCoeff();
        a.class_residual = std::abs(integrate(s, Field::Ones(static_cast<Eigen::Index>(s.size()))) -
                                    s.background().volume) /
                           s.background().volume;
        a.mabuchi_gap = NAN;
        const auto it = std::lower_bound(times.begin(), times.end(), a.t - 1e-9);
        if (it != times.end() && std::abs(*it - a.t) < 1e-6) {
            const auto& rec = trace.records[static_cast<std::size_t>(it - times.begin())];
            try {
                a.mabuchi_gap = std::abs(mabuchi_energy_path(s, X) - rec.mu_X);
            } catch (const DegenerateMetric&) {
            }
            const double osc = rec.theta_max - rec.theta_min;
            a.eigen_low = std::exp(-osc) * rec.lambda;
            a.eigen_high = std::exp(osc) * rec.lambda;
            a.lambda_X = rec.lambda_X;
        }
        out.push_back(a);
    }
    return out;
}

std::vector<Monitor> monitor_audit(const FlowTrace& trace) {
    const std::vector<std::pair<const char*, double DiagnosticsRecord::*>> fields = {
        {"phidot_C0", &DiagnosticsRecord::phidot_C0}, {"X2_max", &DiagnosticsRecord::X2_max},
        {"grad_u_C0", &DiagnosticsRecord::grad_u_C0}, {"lap_u_C0", &DiagnosticsRecord::lap_u_C0},
        {"lap_theta_C0", &DiagnosticsRecord::lap_theta_C0}};
    std::vector<Monitor> out;
    for (const auto& [name, field] : fields) {
        Monitor m;
        m.name = name;
        for (const auto& r : trace.records) {
            const double v = std::abs(r.*field);
            if (r.t <= 1.0 + 1e-9) m.early_max = std::max(m.early_max, v);
            m.overall_max = std::max(m.overall_max, std::isfinite(v) ? v : INFINITY);
        }
        // quantities that vanish identically on [0,1] (e.g. X = 0) only need to stay at roundoff
        const double bound = std::max(10.0 * m.early_max, 1e-9);
        m.ok = m.overall_max <= bound;
        out.push_back(m);
    }
    return out;
}

std::size_t eigenvalue_sandwich_violations(const FlowTrace& trace, double slack) {
    std::size_t bad = 0;
    for (const auto& r : trace.records) {
        const double osc = r.theta_max - r.theta_min;
        const double lo = std::exp(-osc) * r.lambda, hi = std::exp(osc) * r.lambda;
        if (r.lambda_X < lo * (1.0 - slack) || r.lambda_X > hi * (1.0 + slack)) ++bad;
    }
    return bad;
}

namespace {

Json condition_json(const ConditionReport& c) {
    return {{"pass", c.pass}, {"statistic", c.statistic}, {"detail", c.detail}};
}

Json fit_json(const ExpFit& f) {
    return {{"ok", f.ok},   {"kappa", f.kappa}, {"stderr", f.stderr_kappa}, {"r2", f.r2},
            {"log_c", f.log_c}, {"used", f.used}, {"reason", f.reason}};
}

Json integrability_json(const Integrability& i) {
    return {{"finite", i.finite}, {"observed", i.observed}, {"integral", i.integral},
            {"model", i.model},   {"rate", i.rate},         {"reason", i.reason}};
}

Json rational_list(const std::vector<Rational>& v) {
    Json j = Json::array();
    for (const auto& r : v) j.push_back(to_string(r));
    return j;
}

}  // namespace

Json classification_json(const Classification& c) {
    return {{"verdict", to_string(c.verdict)},
            {"integrable_residual", condition_json(c.integrability)},
            {"bounded_phi", condition_json(c.bounded_phi)},
            {"exponential_decay", condition_json(c.exponential)},
            {"y_fit", fit_json(c.y_fit)},
            {"residual_p1", integrability_json(c.res_p1)},
            {"residual_p3", integrability_json(c.res_p3)},
            {"phi_slope", c.phi_slope},
            {"floor_Y", c.floor_Y},
            {"floor_res", c.floor_res},
            {"note", c.note}};
}

Json c0_json(const C0Report& c) {
    return {{"c0", c.c0},
            {"c0_trapezoid", c.c0_trapezoid},
            {"truncation_bound", c.truncation_bound},
            {"c0_channel", c.c0_channel},
            {"u0_average", c.u0_average}};
}

Json difference_inequality_json(const DifferenceInequalityAudit& a) {
    return {{"n", a.table.n},
            {"rho", to_string(a.table.rho)},
            {"N", a.table.N},
            {"half_exponents", rational_list(a.table.halves)},
            {"rows_checked", a.rows.size()},
            {"below_floor", a.below_floor},
            {"c_min", a.c_min},
            {"bessel_ok", a.bessel_ok},
            {"bessel_worst", a.bessel_worst}};
}

Json decay_json(const DecayAudit& a) {
    Json j = {{"result", to_string(a.kind)}, {"checked", a.checked}, {"reason", a.reason}};
    if (a.kind == DecayAudit::Kind::Certified) {
        j["C"] = a.C;
        j["kappa"] = a.kappa;
    }
    if (a.kind == DecayAudit::Kind::HypothesisViolated) j["t"] = a.violation_t;
    return j;
}

Json snapshot_audit_json(const std::vector<SnapshotAudit>& a) {
    Json j = Json::array();
    for (const auto& s : a)
        j.push_back({{"t", s.t},
                     {"bochner", s.bochner},
                     {"bochner_scale", s.bochner_scale},
                     {"weighted_divergence", s.weighted_divergence},
                     {"divergence_gap", s.divergence_gap},
                     {"mabuchi_gap", std::isfinite(s.mabuchi_gap) ? Json(s.mabuchi_gap) : Json(nullptr)},
                     {"class_residual", s.class_residual}});
    return j;
}

Json monitor_json(const std::vector<Monitor>& m) {
    Json j = Json::array();
    for (const auto& x : m)
        j.push_back({{"name", x.name}, {"early_max", x.early_max}, {"overall_max", x.overall_max}, {"ok", x.ok}});
    return j;
}

Json soliton_json(const StationaryResult& r) {
    if (const auto* s = std::get_if<SolitonSolution>(&r)) {
        const VectorFieldSpec X{s->c};
        Json j = snapshot_json(s->state, X);
        j["verdict"] = "SolitonSolution";
        j["residual"] = s->residual;
        j["rhs_residual"] = s->rhs_residual;
        j["iterations"] = s->iterations;
        j["seed_index"] = s->seed_index;
        return j;
    }
    const auto& n = std::get<NoSoliton>(r);
    return {{"verdict", "NoSoliton"},
            {"background", to_string(n.background)},
            {"c", n.c},
            {"best_residual", n.best_residual},
            {"reason", n.reason}};
}

Json full_report(const FlowTrace& trace) {
    Json j;
    j["background"] = trace.background;
    j["c"] = trace.c;
    j["grid"] = trace.grid;
    j["horizon"] = trace.horizon;
    j["termination"] = to_string(trace.termination);
    j["samples"] = trace.records.size();
    j["classification"] = classification_json(classify_run(trace));
    if (trace.records.size() >= 10) j["c0"] = c0_json(compute_c0(trace));
    try {
        const auto a = theorem4_audit(trace, y_floor(trace));
        j["difference_inequality"] = difference_inequality_json(a);
        DecayHypothesis hyp;
        hyp.N = a.table.N;
        // Y <= K0 lets the exponents drop until their half-sum is exactly 1
        const Rational scale = a.table.half_sum();
        for (const auto& h : a.table.halves) hyp.nu.push_back((h + h) / scale);
        double lam = INFINITY;
        for (const auto& r : trace.records) lam = std::min(lam, r.lambda_X);
        hyp.lambda = std::isfinite(lam) && lam > 0.0 ? lam : 1.0;
        hyp.K1 = 2.0 * hyp.N;
        if (trace.horizon > hyp.K1 + 10.0)
            j["decay_audit_Y"] = decay_json(decay_lemma_audit(trace.times(), trace.column(&DiagnosticsRecord::Y_X),
                                                              hyp, AuditBand{}, y_floor(trace)));
    } catch (const std::invalid_argument& e) {
        j["difference_inequality"] = {{"skipped", e.what()}};
    }
    j["monitors"] = monitor_json(monitor_audit(trace));
    j["eigenvalue_sandwich_violations"] = eigenvalue_sandwich_violations(trace);
    if (!trace.snapshots.empty()) {
        j["snapshots"] = snapshot_audit_json(audit_snapshots(trace));
        if (trace.snapshots.size() >= 3)
            j["futaki_invariance"] = futaki_invariance_residual(trace.snapshots, VectorFieldSpec{trace.c});
    }
    Json smooth = Json::array();
    for (const auto& p : smoothing_check(trace))
        if (std::fmod(p.t0 + 1e-9, 1.0) < 1e-6) smooth.push_back({{"t0", p.t0}, {"input", p.input}, {"output", p.output}});
    j["smoothing"] = smooth;
    return j;
}

}  // namespace mkrf
