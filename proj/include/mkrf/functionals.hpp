#pragma once

#include <vector>

#include "mkrf/potentials.hpp"
#include "mkrf/trace.hpp"

namespace mkrf {

double y_x(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p);

// R - n - div X through the curvature route
Field soliton_residual(const MetricState& s, const VectorFieldSpec& X);

struct ResidualNorms {
    double c0 = 0.0;
    double l2 = 0.0;
};
ResidualNorms residual_norms(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p);

// F_X(W) = -int (W u) e^theta omega^n
double futaki(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p);
double futaki_invariance_residual(const std::vector<MetricState>& snapshots, const VectorFieldSpec& X);

struct BochnerTerms {
    double complex_hessian = 0.0;          // ||ddbar u||^2_theta
    double antiholomorphic_hessian = 0.0;  // ||dbar dbar u||^2_theta
    double ricci = 0.0;                    // int Ric(grad u, grad u) e^theta
    double x_term = 0.0;                   // int (nabla X)(grad u, grad u) e^theta
    double residual() const { return complex_hessian - antiholomorphic_hessian - ricci + x_term; }
    double scale() const;
};
BochnerTerms bochner_terms(const MetricState& s, const Field& theta, const Field& u);
double bochner_residual(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p);

// int (Delta eta + X eta) e^theta omega^n
double weighted_divergence_residual(const MetricState& s, const VectorFieldSpec& X, const Field& theta,
                                    const Field& eta);

// Straight-path modified Mabuchi energy relative to the background; Gauss-Legendre in rho,
// starting from `points` nodes and doubling until two rules agree.
double mabuchi_energy_path(const MetricState& s1, const VectorFieldSpec& X, std::size_t points = 24);
// Flow value: anchor - (1/V) int_0^t Y ds, end-corrected trapezoid.
std::vector<double> mabuchi_energy_flow(const FlowTrace& trace);

double poincare_ratio(const MetricState& s, const PotentialBundle& p);

struct SmoothingPair {
    double t0 = 0.0;
    double input = 0.0;   // ||u - b||_C0 at t0
    double output = 0.0;  // ||grad u||_C0 + ||Delta u||_C0 at t0 + 2
};
std::vector<SmoothingPair> smoothing_check(const FlowTrace& trace);

}  // namespace mkrf
