#include "mkrf/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkrf {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ReachedHorizon: return "reached_horizon";
        case Termination::Degenerate: return "degenerate";
        case Termination::DivergenceGuard: return "divergence_guard";
        case Termination::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

int exit_code(Termination t) {
    switch (t) {
        case Termination::ReachedHorizon: return 0;
        case Termination::Degenerate: return 2;
        case Termination::DivergenceGuard: return 3;
        case Termination::NumericalFailure: return 4;
    }
    return 4;
}

std::vector<double> FlowTrace::times() const { return column(&DiagnosticsRecord::t); }

std::vector<double> FlowTrace::column(double DiagnosticsRecord::*field) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.*field);
    return out;
}

double y_x(const MetricState& s, const VectorFieldSpec&, const PotentialBundle& p) {
    return integrate(s, grad_norm_sq(s, p.u), p.exp_theta);
}

Field soliton_residual(const MetricState& s, const VectorFieldSpec& X) {
    return (s.scalar_curvature().array() - static_cast<double>(s.dim())).matrix() -
           divergence_X_christoffel(s, X);
}

ResidualNorms residual_norms(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle&) {
    const Field r = soliton_residual(s, X);
    return {r.cwiseAbs().maxCoeff(), std::sqrt(integrate(s, r.cwiseAbs2()))};
}

double futaki(const MetricState& s, const VectorFieldSpec&, const PotentialBundle& p) {
    const VectorFieldSpec W{1.0};
    return -integrate(s, apply_X(s, p.u, W), p.exp_theta);
}

double futaki_invariance_residual(const std::vector<MetricState>& snapshots, const VectorFieldSpec& X) {
    std::vector<double> values;
    for (const auto& s : snapshots) values.push_back(futaki(s, X, modified_potential(s, X)));
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

double BochnerTerms::scale() const {
    return std::max({std::abs(complex_hessian), std::abs(antiholomorphic_hessian), std::abs(ricci),
                     std::abs(x_term)});
}

BochnerTerms bochner_terms(const MetricState& s, const Field& theta, const Field& u) {
    const Field w = theta.array().exp().matrix();
    const Field g2 = grad_norm_sq(s, u);
    BochnerTerms b;
    b.complex_hessian = integrate(s, complex_hessian_sq(s, u), w);
    b.antiholomorphic_hessian = integrate(s, antiholomorphic_hessian_sq(s, u), w);
    b.ricci = integrate(s, ricci_radial(s).cwiseProduct(g2), w);
    b.x_term = integrate(s, hessian_radial(s, theta).cwiseProduct(g2), w);
    return b;
}

double bochner_residual(const MetricState& s, const VectorFieldSpec&, const PotentialBundle& p) {
    return std::abs(bochner_terms(s, p.theta, p.u).residual());
}

double weighted_divergence_residual(const MetricState& s, const VectorFieldSpec& X, const Field& theta,
                                    const Field& eta) {
    const Field op = laplacian(s, eta) + apply_X(s, eta, X);
    return integrate(s, op, theta.array().exp().matrix());
}

namespace {

double straight_path_rule(const MetricState& s1, const VectorFieldSpec& X, std::size_t points) {
    const auto rule = gauss_legendre(points, 0.0, 1.0);
    const Field& psi1 = s1.psi();
    double total = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double rho = rule.nodes(i);
        std::unique_ptr<MetricState> sr;
        try {
            sr = std::make_unique<MetricState>(s1.background_ptr(), rho * psi1, s1.time());
        } catch (const DegenerateMetric& e) {
            std::ostringstream msg;
            msg << "straight path degenerates at rho=" << rho << ": " << e.what();
            throw DegenerateMetric(msg.str());
        }
        const auto p = modified_potential(*sr, X);
        const Field integrand =
            psi1.cwiseProduct(soliton_residual(*sr, X) - apply_X(*sr, p.u, X));
        total += rule.weights(i) * integrate(*sr, integrand, p.exp_theta);
    }
    return -total / s1.background().volume;
}

}  // namespace

double mabuchi_energy_path(const MetricState& s1, const VectorFieldSpec& X, std::size_t points) {
    // far from the background the integrand in rho sharpens; double until stable
    double q = straight_path_rule(s1, X, points);
    for (std::size_t p = 2 * points; p <= 32 * points; p *= 2) {
        const double next = straight_path_rule(s1, X, p);
        if (std::abs(next - q) <= 1e-11 * std::max(1.0, std::abs(next))) return next;
        q = next;
    }
    return q;
}

std::vector<double> mabuchi_energy_flow(const FlowTrace& trace) {
    const auto& r = trace.records;
    const std::size_t m = r.size();
    // Y' from the quadratic through three neighbouring samples (one-sided at the ends)
    std::vector<double> dy(m, 0.0);
    if (m >= 3) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i == 0 ? 1 : (i == m - 1 ? m - 2 : i);
            const double t0 = r[j - 1].t, t1 = r[j].t, t2 = r[j + 1].t, x = r[i].t;
            dy[i] = r[j - 1].Y_X * (2 * x - t1 - t2) / ((t0 - t1) * (t0 - t2)) +
                    r[j].Y_X * (2 * x - t0 - t2) / ((t1 - t0) * (t1 - t2)) +
                    r[j + 1].Y_X * (2 * x - t0 - t1) / ((t2 - t0) * (t2 - t1));
        }
    }
    std::vector<double> mu;
    mu.reserve(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) {
            const double h = r[i].t - r[i - 1].t;
            // trapezoid with the Euler-Maclaurin end correction
            acc += 0.5 * h * (r[i - 1].Y_X + r[i].Y_X) - h * h / 12.0 * (dy[i] - dy[i - 1]);
        }
        mu.push_back(trace.mu_anchor - acc / trace.volume);
    }
    return mu;
}

double poincare_ratio(const MetricState& s, const PotentialBundle& p) {
    const Field g2 = grad_norm_sq(s, p.u);
    const double c0 = std::sqrt(g2.maxCoeff());
    const double l2 = std::sqrt(integrate(s, g2));
    if (!(c0 > 1e-14) || !(l2 > 1e-14)) return 0.0;
    const double osc = (p.u.array() - p.b).abs().maxCoeff();
    const int n = s.dim();
    return std::pow(osc, n + 1) / (l2 * std::pow(c0, n));
}

std::vector<SmoothingPair> smoothing_check(const FlowTrace& trace) {
    std::vector<SmoothingPair> out;
    const auto& r = trace.records;
    std::size_t j = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double target = r[i].t + 2.0;
        while (j < r.size() && r[j].t < target - 1e-9) ++j;
        if (j >= r.size()) break;
        if (std::abs(r[j].t - target) > 1e-6) continue;
        out.push_back({r[i].t, r[i].u_minus_b_C0, r[j].grad_u_C0 + r[j].lap_u_C0});
    }
    return out;
}

}  // namespace mkrf
