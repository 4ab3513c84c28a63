#include "mkrf/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mkrf/linalg.hpp"

namespace mkrf {

namespace {

double c0_norm(const Field& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

std::vector<Field> seed_starts(const BackgroundGeometry& bg, const StationaryOptions& opt) {
    std::vector<Field> starts;
    const auto N = static_cast<Eigen::Index>(bg.size());
    starts.push_back(Field::Zero(N));
    const auto P = legendre_basis(*bg.grid, 5).values;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 1; k < opt.seeds; ++k) {
        Field v = Field::Zero(N);
        for (int j = 2; j <= 5; ++j) v += gauss(rng) / j * P.col(j);
        v.array() -= bg.mean(v);
        const double top = c0_norm(v);
        if (top > 0.0) v *= opt.seed_amplitude / top;
        // shrink until the start lies in the Kaehler cone
        const Field second = bg.grid->diff() * (bg.profile.asDiagonal() * (bg.grid->diff() * v));
        const double worst = -second.minCoeff();
        if (worst > 0.5) v *= 0.5 / worst;
        starts.push_back(v);
    }
    return starts;
}

}  // namespace

StationaryResult stationary_solve_from(const BackgroundPtr& bg, double c, const Field& start,
                                       const StationaryOptions& opt) {
    const VectorFieldSpec X{c};
    const auto N = static_cast<Eigen::Index>(bg->size());
    NoSoliton fail{bg->id, c, INFINITY, ""};

    std::unique_ptr<MetricState> s;
    try {
        Field psi = start;
        psi.array() -= bg->mean(psi);
        s = std::make_unique<MetricState>(bg, psi);
    } catch (const DegenerateMetric& e) {
        fail.reason = std::string("start is not admissible: ") + e.what();
        return fail;
    }
    Field G = centered_rhs(*s, X);
    double merit = c0_norm(G);
    fail.best_residual = merit;

    int it = 0;
    for (; it < opt.max_iterations && merit > opt.tolerance; ++it) {
        Matrix A(N + 1, N);
        A.topRows(N) = rhs_jacobian(*s, X);
        A.row(N) = bg->measure.transpose() / bg->volume;
        Field b(N + 1);
        b.head(N) = -G;
        b(N) = -bg->mean(s->psi());
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
        cod.setThreshold(1e-11);
        cod.compute(A);
        // one kernel direction for the projection, at most one more for automorphisms
        if (cod.rank() < N - 1)
            throw NumericalFailure("stationary Jacobian is singular (rank " + std::to_string(cod.rank()) + " of " +
                                   std::to_string(N) + ")");
        const Field delta = cod.solve(b);
        if (!delta.allFinite()) throw NumericalFailure("stationary Newton produced a non-finite step");

        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 256.0; alpha *= 0.5) {
            try {
                MetricState trial(bg, s->psi() + alpha * delta);
                Field Gt = centered_rhs(trial, X);
                const double mt = c0_norm(Gt);
                if (std::isfinite(mt) && mt < (1.0 - 1e-4 * alpha) * merit) {
                    s = std::make_unique<MetricState>(std::move(trial));
                    G = std::move(Gt);
                    merit = mt;
                    accepted = true;
                    break;
                }
            } catch (const DegenerateMetric&) {
            }
        }
        fail.best_residual = std::min(fail.best_residual, merit);
        if (!accepted) break;
        if (c0_norm(s->psi()) > 50.0) {
            fail.reason = "Newton iterate ran away (||psi|| > 50)";
            return fail;
        }
    }
    // roundoff can stall a converged iteration just above the target
    if (merit > opt.tolerance && merit > 1e3 * opt.tolerance) {
        if (fail.reason.empty())
            fail.reason = "Newton stalled at ||rhs - mean||_C0 = " + std::to_string(merit) + " after " +
                          std::to_string(it) + " iterations";
        return fail;
    }
    SolitonSolution sol{bg->id, c, *s, c0_norm(soliton_residual(*s, X)), merit, it, 0};
    return sol;
}

std::vector<StationaryResult> stationary_multistart(const BackgroundPtr& bg, double c,
                                                    const StationaryOptions& opt) {
    std::vector<StationaryResult> out;
    int index = 0;
    for (const auto& start : seed_starts(*bg, opt)) {
        auto r = stationary_solve_from(bg, c, start, opt);
        if (auto* sol = std::get_if<SolitonSolution>(&r)) sol->seed_index = index;
        out.push_back(std::move(r));
        ++index;
    }
    return out;
}

StationaryResult stationary_solve(const BackgroundPtr& bg, double c, const StationaryOptions& opt) {
    NoSoliton worst{bg->id, c, INFINITY, ""};
    int index = 0;
    for (const auto& start : seed_starts(*bg, opt)) {
        auto r = stationary_solve_from(bg, c, start, opt);
        if (auto* sol = std::get_if<SolitonSolution>(&r)) {
            sol->seed_index = index;
            return r;
        }
        const auto& ns = std::get<NoSoliton>(r);
        worst.best_residual = std::min(worst.best_residual, ns.best_residual);
        ++index;
    }
    worst.reason = "Newton failed from all " + std::to_string(index) + " seeds; best ||rhs - mean||_C0 = " +
                   std::to_string(worst.best_residual);
    return worst;
}

double futaki_of_c(const MetricState& s, double c) {
    const VectorFieldSpec X{c};
    return futaki(s, X, modified_potential(s, X));
}

SolitonConstant find_soliton_constant_report(const BackgroundPtr& bg) {
    const MetricState s0(bg, Field::Zero(static_cast<Eigen::Index>(bg->size())));
    auto F = [&](double c) { return futaki_of_c(s0, c); };
    // scan for sign changes, keep the bracket closest to c = 0
    double best_lo = NAN, best_hi = NAN;
    double prev_c = -5.0, prev_f = F(prev_c);
    for (int k = 1; k <= 100; ++k) {
        const double c = -5.0 + 0.1 * k;
        const double f = F(c);
        if (prev_f == 0.0 || (prev_f < 0.0) != (f < 0.0)) {
            const double mid = std::abs(0.5 * (prev_c + c));
            if (std::isnan(best_lo) || mid < std::abs(0.5 * (best_lo + best_hi))) {
                best_lo = prev_c;
                best_hi = c;
            }
        }
        prev_c = c;
        prev_f = f;
    }
    if (std::isnan(best_lo)) throw std::domain_error("no sign change of F_{cW}(W) for c in [-5, 5]");
    SolitonConstant out;
    out.c_background = find_root(F, best_lo, best_hi, 1e-15);
    out.c = out.c_background;

    const auto r = stationary_solve(bg, out.c_background);
    if (const auto* sol = std::get_if<SolitonSolution>(&r)) {
        auto Fs = [&](double c) { return futaki_of_c(sol->state, c); };
        const double lo = out.c_background - 0.05, hi = out.c_background + 0.05;
        if ((Fs(lo) < 0.0) != (Fs(hi) < 0.0)) {
            out.c = find_root(Fs, lo, hi, 1e-15);
            out.refined = true;
        }
        out.futaki_at_soliton = Fs(out.c);
    }
    return out;
}

double find_soliton_constant(const BackgroundPtr& bg) { return find_soliton_constant_report(bg).c; }

Field moment_profile(const MetricState& s, const Field& moments) {
    const auto& grid = s.grid();
    const Field& sigma = s.moment();
    Field out(moments.size());
    for (Eigen::Index i = 0; i < moments.size(); ++i) {
        const double m = moments(i);
        auto g = [&](double tau) {
            Field p(1);
            p(0) = tau;
            return grid.interpolate(sigma, p)(0) - m;
        };
        double tau;
        if (m <= sigma(0))
            tau = grid.tau_a();
        else if (m >= sigma(sigma.size() - 1))
            tau = grid.tau_b();
        else
            tau = find_root(g, grid.tau_a(), grid.tau_b(), 1e-15);
        Field p(1);
        p(0) = tau;
        out(i) = grid.interpolate(s.generator_norm_sq(), p)(0);
    }
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Convergent: return "Convergent";
        case Verdict::NonConvergent: return "NonConvergent";
        default: return "Undecided";
    }
}

namespace {

// Y is quadratic in grad u, whose roundoff grows like the square of the grid size
double y_roundoff(const FlowTrace& trace) {
    const double m = static_cast<double>(trace.grid > 1 ? trace.grid - 1 : 1);
    const double e = 1e3 * 2.2e-16 * m * m;
    return e * e;
}

}  // namespace

double y_floor(const FlowTrace& trace) {
    return noise_floor(trace.column(&DiagnosticsRecord::Y_X), 1e-20, y_roundoff(trace));
}

double residual_floor(const FlowTrace& trace) {
    // roundoff in the curvature grows like the fourth power of the grid size
    const double m = static_cast<double>(trace.grid > 1 ? trace.grid - 1 : 1);
    return noise_floor(trace.column(&DiagnosticsRecord::res_C0), 1e-8, 10.0 * 2.2e-16 * m * m * m * m);
}

Classification classify_run(const FlowTrace& trace) {
    Classification out;
    // a run that sits at a stationary metric needs no horizon: every proxy holds trivially
    if (trace.records.size() >= 3 && trace.termination == Termination::ReachedHorizon) {
        const auto Y = trace.column(&DiagnosticsRecord::Y_X);
        const auto res = trace.column(&DiagnosticsRecord::res_C0);
        const auto phi = normalized_phi_stable(trace);
        out.floor_Y = y_floor(trace);
        out.floor_res = residual_floor(trace);
        const double y_max = *std::max_element(Y.begin(), Y.end());
        const double r_max = *std::max_element(res.begin(), res.end());
        const double p_max = *std::max_element(phi.begin(), phi.end());
        if (y_max <= y_roundoff(trace) && r_max <= out.floor_res && p_max <= 1e-8) {
            out.integrability = {true, 0.0, "residual at the noise floor throughout"};
            out.bounded_phi = {true, p_max, "normalized potential at the noise floor throughout"};
            out.exponential = {true, 0.0, "Y at numerical zero throughout"};
            out.verdict = Verdict::Convergent;
            out.note = "stationary run";
            return out;
        }
        out = Classification{};
    }
    if (trace.records.size() < 40 || trace.horizon < 20.0) {
        out.note = "horizon below 20 or too few samples; nothing decided";
        return out;
    }
    const auto t = trace.times();
    const auto Y = trace.column(&DiagnosticsRecord::Y_X);
    const auto res = trace.column(&DiagnosticsRecord::res_C0);
    out.floor_Y = y_floor(trace);
    out.floor_res = residual_floor(trace);

    // integrability of the curvature residual, p = 1 and p = 3
    out.res_p1 = integrability_check(t, res, 1.0, out.floor_res);
    out.res_p3 = integrability_check(t, res, 3.0, out.floor_res);
    out.integrability.pass = out.res_p1.finite;
    out.integrability.statistic = out.res_p1.integral;
    out.integrability.detail = out.res_p1.model + " tail, rate " + std::to_string(out.res_p1.rate) +
                               (out.res_p1.reason.empty() ? "" : ": " + out.res_p1.reason);

    // boundedness of the normalized potential: trailing-half growth
    const auto phi = normalized_phi_stable(trace);
    const std::size_t start = t.size() / 2;
    double st = 0, sp = 0, stt = 0, stp = 0;
    const double cnt = static_cast<double>(t.size() - start);
    double phi_max = 0.0;
    for (std::size_t i = start; i < t.size(); ++i) {
        st += t[i];
        sp += phi[i];
        stt += t[i] * t[i];
        stp += t[i] * phi[i];
    }
    for (double v : phi) phi_max = std::max(phi_max, v);
    out.phi_slope = (cnt * stp - st * sp) / (cnt * stt - st * st);
    const double growth = std::abs(out.phi_slope) * (t.back() - t[start]);
    out.bounded_phi.statistic = growth;
    out.bounded_phi.pass = std::isfinite(growth) && growth <= 0.05 * (1.0 + phi_max);
    out.bounded_phi.detail = "trailing-half growth " + std::to_string(growth) + " against sup " +
                             std::to_string(phi_max);

    // exponential decay of Y
    out.y_fit = fit_exponential(t, Y, 0.5, out.floor_Y);
    const auto& f = out.y_fit;
    out.exponential.statistic = f.kappa;
    out.exponential.pass = f.ok && f.kappa > 0.0 && f.stderr_kappa < f.kappa / 5.0 && f.r2 > 0.99;
    out.exponential.detail = "kappa " + std::to_string(f.kappa) + " +- " + std::to_string(f.stderr_kappa) +
                             ", R^2 " + std::to_string(f.r2) + (f.reason.empty() ? "" : ": " + f.reason);

    const int passed = out.integrability.pass + out.bounded_phi.pass + out.exponential.pass;
    out.verdict = passed == 3 ? Verdict::Convergent : passed == 0 ? Verdict::NonConvergent : Verdict::Undecided;
    if (trace.termination != Termination::ReachedHorizon) out.note = "run stopped early: " + trace.message;
    return out;
}

}  // namespace mkrf
