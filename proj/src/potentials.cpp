#include "mkrf/potentials.hpp"

#include <cmath>

namespace mkrf {

namespace {

// log int e^g dmu without overflow
double log_integral_exp(const MetricState& s, const Field& g) {
    const double top = g.maxCoeff();
    return top + std::log(s.density().dot((g.array() - top).exp().matrix()));
}

}  // namespace

Field hamiltonian_theta(const MetricState& s, const VectorFieldSpec& X, double* kappa) {
    if (!std::isfinite(X.c)) throw NumericalFailure("vector field coefficient is not finite");
    const Field raw = x_coefficient(s, X) * s.moment();
    const double k = std::log(s.background().volume) - log_integral_exp(s, raw);
    if (!std::isfinite(k)) throw NumericalFailure("theta normalization failed");
    if (kappa) *kappa = k;
    return (raw.array() + k).matrix();
}

Field hamiltonian_theta_direct(const MetricState& s, const VectorFieldSpec& X) {
    const Field slope = x_coefficient(s, X) * s.moment_slope();
    Field raw = s.grid().antiderivative(slope);
    const double k = theta_normalization_newton(s, raw);
    return (raw.array() + k).matrix();
}

double theta_normalization_newton(const MetricState& s, const Field& raw, double tol) {
    const double V = s.background().volume;
    // g(k) = log int e^{raw+k} - log V is increasing with unit slope; bracket then Newton.
    auto g = [&](double k) { return log_integral_exp(s, raw) + k - std::log(V); };
    double lo = -raw.maxCoeff() - 50.0, hi = -raw.minCoeff() + 50.0;
    double k = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double val = g(k);
        if (std::abs(val) < tol) return k;
        if (val > 0.0) hi = k; else lo = k;
        double next = k - val;  // derivative is exactly 1
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        k = next;
    }
    throw NumericalFailure("theta normalization did not converge");
}

Field ricci_potential(const MetricState& s, double* kappa) {
    const auto& bg = s.background();
    const Field raw = bg.ricci_potential + s.psi() + s.volume_ratio().array().log().matrix();
    // e^{-log h} h m = m, so the normalization only sees f0 + psi
    const Field g = -(bg.ricci_potential + s.psi());
    const double top = g.maxCoeff();
    const double k = top + std::log(bg.measure.dot((g.array() - top).exp().matrix()) / bg.volume);
    if (!std::isfinite(k)) throw NumericalFailure("Ricci potential normalization failed");
    if (kappa) *kappa = k;
    return (raw.array() + k).matrix();
}

PotentialBundle modified_potential(const MetricState& s, const VectorFieldSpec& X) {
    PotentialBundle p;
    p.theta = hamiltonian_theta(s, X, &p.kappa_theta);
    p.f = ricci_potential(s, &p.kappa_f);
    p.u = p.f + p.theta;
    p.exp_theta = p.theta.array().exp().matrix();
    p.exp_minus_f = (-p.f).array().exp().matrix();
    p.b = average_b(s, p);
    return p;
}

double average_b(const MetricState& s, const PotentialBundle& p) {
    return integrate(s, p.u, p.exp_minus_f) / s.background().volume;
}

double integrate(const MetricState& s, const Field& eta, Weight weight, const PotentialBundle& p) {
    switch (weight) {
        case Weight::ExpTheta: return integrate(s, eta, p.exp_theta);
        case Weight::ExpMinusF: return integrate(s, eta, p.exp_minus_f);
        case Weight::Plain: break;
    }
    return integrate(s, eta);
}

}  // namespace mkrf
