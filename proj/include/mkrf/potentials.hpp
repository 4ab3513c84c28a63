#pragma once

#include "mkrf/metric.hpp"

namespace mkrf {

struct PotentialBundle {
    Field theta;
    Field f;
    Field u;
    Field exp_theta;
    Field exp_minus_f;
    double b = 0.0;
    double kappa_theta = 0.0;
    double kappa_f = 0.0;
};

enum class Weight { Plain, ExpTheta, ExpMinusF };

// theta = c sigma + kappa, normalized by int e^theta omega^n = V.
Field hamiltonian_theta(const MetricState& s, const VectorFieldSpec& X, double* kappa = nullptr);
// Independent route: integrate theta_tau = c sigma_tau from X^j g_{kbar j} = d_kbar theta.
Field hamiltonian_theta_direct(const MetricState& s, const VectorFieldSpec& X);
// Normalization constant solved by safeguarded Newton in kappa.
double theta_normalization_newton(const MetricState& s, const Field& theta_unnormalized, double tol = 1e-12);

// f = f0 + psi + log h + kappa, normalized by int e^{-f} omega^n = V.
Field ricci_potential(const MetricState& s, double* kappa = nullptr);

PotentialBundle modified_potential(const MetricState& s, const VectorFieldSpec& X);
double average_b(const MetricState& s, const PotentialBundle& bundle);

double integrate(const MetricState& s, const Field& eta, Weight weight, const PotentialBundle& bundle);

}  // namespace mkrf
