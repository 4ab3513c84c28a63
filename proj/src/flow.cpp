#include "mkrf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mkrf/linalg.hpp"

namespace mkrf {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::RK4: return "rk4";
        case Scheme::Rosenbrock: return "rosenbrock";
        default: return "auto";
    }
}

Scheme parse_scheme(const std::string& name) {
    if (name == "rk4") return Scheme::RK4;
    if (name == "rosenbrock") return Scheme::Rosenbrock;
    if (name == "auto") return Scheme::Auto;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected rk4, rosenbrock or auto)");
}

void validate(const FlowConfig& cfg) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    need(std::isfinite(cfg.c), "c must be finite");
    need(std::isfinite(cfg.amplitude), "amplitude must be finite");
    need(cfg.grid >= MomentumGrid::min_nodes, "grid must be at least 16 nodes");
    need(cfg.grid <= 1025, "grid must be at most 1025 nodes");
    need(std::isfinite(cfg.T) && cfg.T > 0.0, "T must be positive");
    need(cfg.dt_min > 0.0, "dt_min must be positive");
    need(cfg.dt_init >= cfg.dt_min, "dt_init must be at least dt_min");
    need(cfg.dt_max >= cfg.dt_init, "dt_max must be at least dt_init");
    need(cfg.safety > 0.0 && cfg.safety <= 1.0, "safety must lie in (0, 1]");
    need(cfg.explicit_floor > 0.0, "explicit_floor must be positive");
    need(cfg.rtol > 0.0 && cfg.atol > 0.0, "tolerances must be positive");
    need(cfg.sample_cadence > 0.0 && cfg.sample_cadence <= 0.05, "sample_cadence must lie in (0, 0.05]");
    need(cfg.snapshot_cadence >= cfg.sample_cadence, "snapshot_cadence must be at least sample_cadence");
    need(cfg.divergence_guard > 0.0, "divergence_guard must be positive");
    need(cfg.adapt_threshold > 1.0, "adapt_threshold must exceed 1");
    need(cfg.base == "background" || cfg.base == "soliton", "base must be background or soliton");
    static const char* families[] = {"none", "p2", "p3", "mixed", "cos", "random"};
    need(std::find(std::begin(families), std::end(families), cfg.perturbation) != std::end(families),
         "perturbation must be one of none, p2, p3, mixed, cos, random");
}

Field perturbation_shape(const BackgroundGeometry& bg, const std::string& family, std::uint64_t seed) {
    const auto& grid = *bg.grid;
    const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
    if (family == "none") return Field::Zero(N);
    const auto P = legendre_basis(grid, 6).values;
    Field shape(N);
    if (family == "p2") {
        shape = P.col(2);
    } else if (family == "p3") {
        shape = P.col(3);
    } else if (family == "mixed") {
        shape = P.col(2) + 0.5 * P.col(3);
    } else if (family == "cos") {
        for (Eigen::Index j = 0; j < N; ++j) shape(j) = std::cos(M_PI * grid.to_reference(bg.tau(j)));
    } else if (family == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        shape = Field::Zero(N);
        for (int k = 2; k <= 6; ++k) shape += gauss(rng) / (k * k) * P.col(k);
    } else {
        throw std::invalid_argument("unknown perturbation family '" + family + "'");
    }
    shape.array() -= bg.mean(shape);
    const double top = shape.cwiseAbs().maxCoeff();
    return top > 0.0 ? Field(shape / top) : shape;
}

Field initial_psi(const FlowConfig& cfg, const BackgroundPtr& bg) {
    Field psi = cfg.amplitude * perturbation_shape(*bg, cfg.perturbation, cfg.seed);
    if (cfg.base_psi) {
        if (cfg.base_psi->size() != psi.size()) throw std::invalid_argument("base potential has the wrong size");
        psi += *cfg.base_psi;
    }
    psi.array() -= bg->mean(psi);
    return psi;
}

namespace {

// Flow right-hand side on bare psi vectors, skipping the curvature cache.
class Integrator {
public:
    Integrator(const BackgroundPtr& bg, const VectorFieldSpec& X)
        : bg_(bg), k_(X.c * bg->generator_sign), log_volume_(std::log(bg->volume)) {
        const auto& D = bg->grid->diff();
        pd_ = bg->profile.asDiagonal() * D;
        dpd_ = D * pd_;
    }

    Field eval(const Field& psi, double* mean = nullptr) const {
        const auto& bg = *bg_;
        const Field sigma = bg.tau + pd_ * psi;
        const Field sigma_t = dpd_ * psi + Field::Ones(psi.size());
        if (!(sigma_t.minCoeff() > 0.0) || !sigma_t.allFinite())
            throw StepRejected("stage left the Kaehler cone");
        Field logh = sigma_t.array().log().matrix();
        if (bg.n > 1) logh.array() += (bg.n - 1.0) * (sigma.array() / bg.tau.array()).log();
        // theta = k sigma + kappa with int e^theta h m = V
        const Field g = (k_ * sigma + logh + bg.measure.array().log().matrix());
        double top = -INFINITY;
        for (Eigen::Index j = 0; j < g.size(); ++j)
            if (bg.measure(j) > 0.0) top = std::max(top, g(j));
        double acc = 0.0;
        for (Eigen::Index j = 0; j < g.size(); ++j)
            if (bg.measure(j) > 0.0) acc += std::exp(g(j) - top);
        const double kappa = log_volume_ - top - std::log(acc);
        Field r = logh + psi + bg.ricci_potential;
        r.array() += k_ * sigma.array() + kappa;
        const double m = bg.mean(r);
        if (mean) *mean = m;
        r.array() -= m;
        if (!r.allFinite()) throw StepRejected("non-finite rhs");
        return r;
    }

    Field jvp(const Field& psi, const Field& v) const {
        const auto& bg = *bg_;
        const Field sigma = bg.tau + pd_ * psi;
        const Field sigma_t = dpd_ * psi + Field::Ones(psi.size());
        const Field dsigma = pd_ * v;
        Field out = ((dpd_ * v).array() / sigma_t.array()).matrix() + v + k_ * dsigma;
        if (bg.n > 1) out.array() += (bg.n - 1.0) * dsigma.array() / sigma.array();
        out.array() -= bg.mean(out);
        return out;
    }

    Matrix jacobian(const Field& psi) const {
        const auto& bg = *bg_;
        const Field sigma = bg.tau + pd_ * psi;
        const Field sigma_t = dpd_ * psi + Field::Ones(psi.size());
        Field inv_t = sigma_t.cwiseInverse();
        Matrix J = inv_t.asDiagonal() * dpd_;
        Field coef = Field::Constant(psi.size(), k_);
        if (bg.n > 1) coef.array() += (bg.n - 1.0) / sigma.array();
        J += coef.asDiagonal() * pd_;
        J.diagonal().array() += 1.0;
        const Eigen::RowVectorXd avg = bg.measure.transpose() * J / bg.volume;
        J.rowwise() -= avg;
        return J;
    }

    Field rk4(const Field& psi, double dt, double* lipschitz = nullptr) const {
        const Field k1 = eval(psi);
        const Field k2 = eval(psi + 0.5 * dt * k1);
        const Field k3 = eval(psi + 0.5 * dt * k2);
        const Field k4 = eval(psi + dt * k3);
        if (lipschitz) {
            const double a = k1.cwiseAbs().maxCoeff();
            *lipschitz = a > 1e-12 ? (k2 - k1).cwiseAbs().maxCoeff() / (0.5 * dt * a) : 0.0;
        }
        Field out = bg_->grid->strip_highest_mode(psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        out.array() -= bg_->mean(out);
        return out;
    }

    // Shampine's L-stable fourth-order Rosenbrock method with embedded error.
    Field rosenbrock(const Field& psi, double dt, Field& err) const {
        constexpr double gam = 0.5, a21 = 2.0, a31 = 48.0 / 25.0, a32 = 6.0 / 25.0, c21 = -8.0,
                         c31 = 372.0 / 25.0, c32 = 12.0 / 5.0, c41 = -112.0 / 125.0, c42 = -54.0 / 125.0,
                         c43 = -2.0 / 5.0, b1 = 19.0 / 9.0, b2 = 0.5, b3 = 25.0 / 108.0, b4 = 125.0 / 108.0,
                         e1 = 17.0 / 54.0, e2 = 7.0 / 36.0, e3 = 0.0, e4 = 125.0 / 108.0;
        Matrix A = -jacobian(psi);
        A.diagonal().array() += 1.0 / (gam * dt);
        Eigen::PartialPivLU<Matrix> lu(A);
        Field f = eval(psi);
        const Field g1 = lu.solve(f);
        f = eval(psi + a21 * g1);
        const Field g2 = lu.solve(f + c21 * g1 / dt);
        f = eval(psi + a31 * g1 + a32 * g2);
        const Field g3 = lu.solve(f + (c31 * g1 + c32 * g2) / dt);
        const Field g4 = lu.solve(f + (c41 * g1 + c42 * g2 + c43 * g3) / dt);
        err = e1 * g1 + e2 * g2 + e3 * g3 + e4 * g4;
        Field out = psi + b1 * g1 + b2 * g2 + b3 * g3 + b4 * g4;
        if (!out.allFinite()) throw StepRejected("non-finite Rosenbrock update");
        out = bg_->grid->strip_highest_mode(out);
        out.array() -= bg_->mean(out);
        // the stage evaluation checks the cone condition for the result as well
        eval(out);
        return out;
    }

    double stiffness(const Field& psi, int iterations) const {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Field v(psi.size());
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = u(rng);
        v.array() -= bg_->mean(v);
        double est = 0.0;
        for (int it = 0; it < iterations; ++it) {
            const double nv = v.norm();
            if (!(nv > 0.0)) break;
            v /= nv;
            const Field w = jvp(psi, v);
            est = w.norm();
            v = w;
        }
        return est;
    }

private:
    BackgroundPtr bg_;
    double k_;
    double log_volume_;
    Matrix pd_;   // phi0 D
    Matrix dpd_;  // D phi0 D
};

}  // namespace

Field rhs(const MetricState& s, const VectorFieldSpec& X) {
    return s.volume_ratio().array().log().matrix() + s.psi() + hamiltonian_theta(s, X) +
           s.background().ricci_potential;
}

Field centered_rhs(const MetricState& s, const VectorFieldSpec& X, double* mean) {
    Field r = rhs(s, X);
    const double m = s.background().mean(r);
    if (mean) *mean = m;
    r.array() -= m;
    return r;
}

Matrix rhs_jacobian(const MetricState& s, const VectorFieldSpec& X) {
    return Integrator(s.background_ptr(), X).jacobian(s.psi());
}

MetricState step(const MetricState& s, const VectorFieldSpec& X, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
    const Integrator in(s.background_ptr(), X);
    Field next;
    if (scheme == Scheme::RK4) {
        next = in.rk4(s.psi(), dt);
    } else {
        Field err;
        next = in.rosenbrock(s.psi(), dt, err);
    }
    try {
        return MetricState(s.background_ptr(), std::move(next), s.time() + dt);
    } catch (const DegenerateMetric& e) {
        throw StepRejected(e.what());
    }
}

MetricState step_with_error(const MetricState& s, const VectorFieldSpec& X, double dt, Field& error) {
    const Integrator in(s.background_ptr(), X);
    Field next = in.rosenbrock(s.psi(), dt, error);
    try {
        return MetricState(s.background_ptr(), std::move(next), s.time() + dt);
    } catch (const DegenerateMetric& e) {
        throw StepRejected(e.what());
    }
}

double stiffness_estimate(const MetricState& s, const VectorFieldSpec& X, int iterations) {
    return Integrator(s.background_ptr(), X).stiffness(s.psi(), iterations);
}

DiagnosticsRecord sample_diagnostics(const MetricState& s, const VectorFieldSpec& X, const Field& psi0,
                                     bool spectral) {
    DiagnosticsRecord r;
    const auto& bg = s.background();
    const auto p = modified_potential(s, X);
    const Field g2 = grad_norm_sq(s, p.u);
    const Field lap_u = laplacian(s, p.u);
    const auto res = residual_norms(s, X, p);
    r.t = s.time();
    r.Y_X = y_x(s, X, p);
    r.b = p.b;
    r.F_X = futaki(s, X, p);
    r.res_C0 = res.c0;
    r.res_L2 = res.l2;
    r.grad_u_C0 = std::sqrt(g2.maxCoeff());
    r.lap_u_C0 = lap_u.cwiseAbs().maxCoeff();
    r.X2_max = X.c * X.c * s.generator_norm_sq().maxCoeff();
    r.h_min = s.volume_ratio().minCoeff();
    r.h_max = s.volume_ratio().maxCoeff();
    r.theta_min = p.theta.minCoeff();
    r.theta_max = p.theta.maxCoeff();

    r.kappa_f = p.kappa_f;
    r.u_min = p.u.minCoeff();
    r.u_max = p.u.maxCoeff();
    // rhs = u - kappa_f, so its m-mean follows from u
    r.mean_rhs = bg.mean(p.u) - p.kappa_f;
    const Field dev = s.psi() - psi0;
    r.psi_dev_min = dev.minCoeff();
    r.psi_dev_max = dev.maxCoeff();
    r.psi_C0 = s.psi().cwiseAbs().maxCoeff();
    r.u_minus_b_C0 = (p.u.array() - p.b).abs().maxCoeff();
    r.grad_u_L2 = std::sqrt(integrate(s, g2));
    holomorphic_projection(s, p, r.a_W, r.W_norm_theta_sq);
    r.F_pi = -r.a_W * r.a_W * r.W_norm_theta_sq;
    r.lap_theta_C0 = divergence_X(s, X).cwiseAbs().maxCoeff();
    r.poincare = poincare_ratio(s, p);
    r.class_residual = std::abs(integrate(s, Field::Ones(static_cast<Eigen::Index>(s.size()))) - bg.volume) /
                       bg.volume;
    if (spectral) {
        r.lambda = lambda_eig(s, X, false).eigenvalue;
        r.lambda_X = X.c == 0.0 ? r.lambda : lambda_eig(s, X, true).eigenvalue;
    }
    return r;
}

FlowTrace run(const FlowConfig& cfg) { return run(cfg, make_background(cfg.background, cfg.grid)); }

FlowTrace run(const FlowConfig& cfg, const BackgroundPtr& bg) {
    validate(cfg);
    const VectorFieldSpec X{cfg.c};
    FlowTrace trace;
    trace.background = bg->name;
    trace.n = bg->n;
    trace.volume = bg->volume;
    trace.c = cfg.c;
    trace.grid = bg->size();
    trace.horizon = cfg.T;

    Field psi0 = initial_psi(cfg, bg);
    BackgroundPtr cur = bg;
    std::unique_ptr<MetricState> state;
    try {
        state = std::make_unique<MetricState>(bg, psi0, 0.0);
    } catch (const DegenerateMetric& e) {
        throw DegenerateMetric(std::string("initial potential is not admissible: ") + e.what());
    }
    {
        const auto p0 = modified_potential(*state, X);
        trace.kappa_f0 = p0.kappa_f;
        trace.u0_average = integrate(*state, p0.u, p0.exp_theta) / bg->volume;
        try {
            trace.mu_anchor = mabuchi_energy_path(*state, X);
        } catch (const DegenerateMetric&) {
            trace.mu_anchor = NAN;
        }
    }

    auto in = std::make_unique<Integrator>(bg, X);
    const auto samples = static_cast<std::size_t>(std::llround(cfg.T / cfg.sample_cadence));
    const auto snap_every =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.snapshot_cadence / cfg.sample_cadence)));

    Field psi = psi0;
    double t = 0.0;
    double dt = cfg.dt_init;
    int streak = 0;
    double dt_stable = INFINITY;

    auto record = [&](std::size_t index) {
        auto rec = sample_diagnostics(*state, X, psi0, cfg.spectral_diagnostics);
        rec.dt = dt;
        trace.records.push_back(rec);
        if (index % snap_every == 0) trace.snapshots.push_back(*state);
    };
    auto terminate = [&](Termination why, const std::string& msg) {
        trace.termination = why;
        trace.message = msg;
    };

    record(0);
    double dt_ros = cfg.dt_init;  // Rosenbrock keeps its own error-controlled step
    for (std::size_t k = 1; k <= samples; ++k) {
        const double target = static_cast<double>(k) * cfg.sample_cadence;
        bool explicit_step = cfg.scheme == Scheme::RK4;
        if (cfg.scheme != Scheme::Rosenbrock) {
            dt_stable = cfg.safety * 2.78 / std::max(in->stiffness(psi, 40), 1e-12);
            if (cfg.scheme == Scheme::Auto) explicit_step = dt_stable >= cfg.explicit_floor;
        }
        bool failed = false;
        while (t < target - 1e-12) {
            const double room = target - t;
            double h = explicit_step ? std::min({dt, cfg.dt_max, room, dt_stable}) : std::min(dt_ros, room);
            try {
                Field next;
                if (explicit_step) {
                    const bool clipped = h < dt;
                    double lip = 0.0;
                    next = in->rk4(psi, h, &lip);
                    if (h * lip > 2.78) throw StepRejected("step exceeds the stability bound");
                    if (++streak >= 10 && !clipped) {
                        dt = std::min(dt * 1.2, cfg.dt_max);
                        streak = 0;
                    }
                } else {
                    Field err;
                    next = in->rosenbrock(psi, h, err);
                    double e = 0.0;
                    for (Eigen::Index j = 0; j < err.size(); ++j)
                        e = std::max(e, std::abs(err(j)) /
                                            (cfg.atol + cfg.rtol * std::max(std::abs(psi(j)), std::abs(next(j)))));
                    const double grow = 0.9 * std::pow(std::max(e, 1e-10), -0.25);
                    if (e > 1.0) {
                        dt_ros = h * std::max(0.2, grow);
                        ++trace.steps_rejected;
                        if (dt_ros < cfg.dt_min) throw StepRejected("error control");
                        continue;
                    }
                    // a step shortened to hit the sample time says little about the next one
                    if (h >= dt_ros) dt_ros = std::min(h * std::min(4.0, grow), cfg.dt_max);
                }
                psi = std::move(next);
                t += h;
                ++trace.steps_accepted;
            } catch (const StepRejected& e) {
                ++trace.steps_rejected;
                streak = 0;
                if (explicit_step)
                    dt = 0.5 * h;
                else
                    dt_ros = 0.5 * h;
                if (0.5 * h < cfg.dt_min) {
                    // a cone violation that survives dt_min is a genuine degeneration
                    const std::string why = e.what();
                    if (why.find("Kaehler cone") != std::string::npos)
                        terminate(Termination::Degenerate, "degenerate metric at t=" + std::to_string(t) + ": " + why);
                    else
                        terminate(Termination::NumericalFailure,
                                  "step size fell below dt_min at t=" + std::to_string(t) + ": " + why);
                    failed = true;
                    break;
                }
            }
        }
        if (failed) break;
        t = target;
        try {
            state = std::make_unique<MetricState>(cur, psi, t);
        } catch (const DegenerateMetric& e) {
            terminate(Termination::Degenerate, e.what());
            break;
        }
        // Concentration at a pole (the metric drifting along an automorphism
        // orbit) leaves a log layer of width ~ 2/h_max; re-cluster the nodes
        // before it outruns the grid.
        if (cfg.adapt_grid) {
            const Field& h = state->volume_ratio();
            Eigen::Index at = 0;
            const double hmax = h.maxCoeff(&at);
            const double want = 2.0 / hmax;
            const auto& gm = cur->grid->map();
            if (hmax > cfg.adapt_threshold && (!gm.active() || want < 0.5 * gm.delta)) {
                const GridMap map{want, at < h.size() / 2 ? -1 : 1};
                try {
                    auto next = make_background(cur->id, cur->size(), map);
                    Field moved = cur->grid->interpolate(psi, next->tau);
                    Field moved0 = cur->grid->interpolate(psi0, next->tau);
                    moved.array() -= next->mean(moved);
                    moved0.array() -= next->mean(moved0);
                    auto fresh = std::make_unique<MetricState>(next, moved, t);
                    cur = next;
                    psi = std::move(moved);
                    psi0 = std::move(moved0);
                    state = std::move(fresh);
                    in = std::make_unique<Integrator>(cur, X);
                    ++trace.regrids;
                } catch (const DegenerateMetric&) {
                    // keep the old grid; the next sample tries again
                }
            }
        }
        if (psi.cwiseAbs().maxCoeff() > cfg.divergence_guard) {
            record(k);
            terminate(Termination::DivergenceGuard, "||psi||_C0 exceeded the divergence guard");
            break;
        }
        try {
            record(k);
        } catch (const std::exception& e) {
            terminate(Termination::NumericalFailure, std::string("diagnostics failed: ") + e.what());
            break;
        }
    }
    finalize_trace(trace);
    return trace;
}

namespace {

// int_{t0}^{t1} e^{t0 - s} g(s) ds for g linear between g0 and g1
double backward_weight(double dt, double g0, double g1) {
    const double em = std::exp(-dt);
    const double i0 = -std::expm1(-dt);
    const double i1 = dt > 1e-8 ? (i0 - dt * em) / dt : 0.5 * dt;
    return g0 * i0 + (g1 - g0) * i1;
}

// int_{t0}^{t1} e^{t1 - s} g(s) ds for linear g
double forward_weight(double dt, double g0, double g1) {
    const double e1 = std::expm1(dt);
    const double i1 = dt > 1e-8 ? (e1 - dt) / dt : 0.5 * dt;
    return g0 * e1 + (g1 - g0) * i1;
}

std::vector<double> channel_source(const FlowTrace& trace) {
    std::vector<double> g;
    for (const auto& r : trace.records) g.push_back(r.mean_rhs + trace.kappa_f0);
    return g;
}

std::vector<double> phi_norms(const FlowTrace& trace, const std::vector<double>& A) {
    std::vector<double> out;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        out.push_back(std::max(std::abs(r.psi_dev_max + A[i]), std::abs(r.psi_dev_min + A[i])));
    }
    return out;
}

}  // namespace

C0Report compute_c0(const FlowTrace& trace) {
    if (trace.records.size() < 10) throw std::invalid_argument("compute_c0 needs at least 10 samples");
    C0Report rep;
    const auto t = trace.times();
    std::vector<double> w;
    double ysup = 0.0;
    for (const auto& r : trace.records) {
        w.push_back(std::exp(-r.t) * r.Y_X);
        ysup = std::max(ysup, r.Y_X);
    }
    const double V = trace.volume;
    rep.u0_average = trace.u0_average;
    rep.c0 = simpson(t, w) / V - trace.u0_average;
    rep.c0_trapezoid = trapezoid(t, w) / V - trace.u0_average;
    rep.truncation_bound = std::exp(-t.back()) * ysup / V;
    rep.c0_channel = constant_channel_stable(trace).front();
    return rep;
}

std::vector<double> constant_channel_forward(const FlowTrace& trace, double c0) {
    const auto g = channel_source(trace);
    std::vector<double> A(g.size());
    if (A.empty()) return A;
    A[0] = c0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double dt = trace.records[i].t - trace.records[i - 1].t;
        A[i] = std::exp(dt) * A[i - 1] + forward_weight(dt, g[i - 1], g[i]);
    }
    return A;
}

std::vector<double> constant_channel_stable(const FlowTrace& trace) {
    const auto g = channel_source(trace);
    std::vector<double> A(g.size());
    if (A.empty()) return A;
    const std::size_t last = g.size() - 1;
    // tail beyond the horizon: g continued linearly, int_T^inf e^{T-s} g = g + g'
    double slope = 0.0;
    if (last > 0) slope = (g[last] - g[last - 1]) / (trace.records[last].t - trace.records[last - 1].t);
    A[last] = -(g[last] + slope);
    for (std::size_t i = last; i-- > 0;) {
        const double dt = trace.records[i + 1].t - trace.records[i].t;
        A[i] = std::exp(-dt) * A[i + 1] - backward_weight(dt, g[i], g[i + 1]);
    }
    return A;
}

std::vector<double> normalized_phi(const FlowTrace& trace, double c0) {
    return phi_norms(trace, constant_channel_forward(trace, c0));
}

std::vector<double> normalized_phi_stable(const FlowTrace& trace) {
    return phi_norms(trace, constant_channel_stable(trace));
}

void finalize_trace(FlowTrace& trace) {
    if (trace.records.empty()) return;
    const auto mu = mabuchi_energy_flow(trace);
    const auto A = constant_channel_stable(trace);
    const auto phi = phi_norms(trace, A);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        auto& r = trace.records[i];
        r.mu_X = mu[i];
        r.phi_C0 = phi[i];
        // phi_dot = u - kappa_f + A + kappa_f0
        const double shift = A[i] + trace.kappa_f0 - r.kappa_f;
        r.phidot_C0 = std::max(std::abs(r.u_max + shift), std::abs(r.u_min + shift));
    }
}

EvolutionResiduals evolution_identity_residuals(const MetricState& s, const VectorFieldSpec& X, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const auto bg = s.background_ptr();
    // time derivatives as directional derivatives along the flow velocity;
    // stepping in time instead drags in the stiff modes (backward steps blow up)
    double g = 0.0;
    const Field dpsi = centered_rhs(s, X, &g);
    const double eps = delta / std::max(1.0, dpsi.cwiseAbs().maxCoeff());
    std::vector<MetricState> st;
    Field v[5];
    for (int k = 0; k < 5; ++k) {
        const double e = (k - 2) * eps;
        st.emplace_back(bg, Field(s.psi() + e * dpsi), s.time() + e);
        v[k] = -(rhs(st[k], X).array() + e * g);  // constant channel: A(t0) = 0, A' = g
    }
    auto L = [&](const MetricState& m, const Field& q) { return Field(laplacian(m, q) + apply_X(m, q, X)); };
    // five-point stencil, fourth order in eps
    auto diff = [&](const Field* q) { return Field((q[0] - 8.0 * q[1] + 8.0 * q[3] - q[4]) / (12.0 * eps)); };

    const MetricState& c = st[2];
    EvolutionResiduals out;
    out.first = (diff(v) - L(c, v[2]) - v[2]).cwiseAbs().maxCoeff();

    Field gr[5], lp[5], h[5];
    for (int k = 0; k < 5; ++k) {
        gr[k] = grad_norm_sq(st[k], v[k]);
        lp[k] = L(st[k], v[k]);
        h[k] = st[k].volume_ratio();
    }
    const Field rhs2 = L(c, gr[2]) - antiholomorphic_hessian_sq(c, v[2]) - complex_hessian_sq(c, v[2]) + gr[2];
    out.gradient = (diff(gr) - rhs2).cwiseAbs().maxCoeff();
    const Field rhs3 = L(c, lp[2]) + lp[2] + complex_hessian_sq(c, v[2]);
    out.laplacian = (diff(lp) - rhs3).cwiseAbs().maxCoeff();
    const Field hrhs = -c.volume_ratio().cwiseProduct(soliton_residual(c, X));
    out.h_evolution = (diff(h) - hrhs).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace mkrf
