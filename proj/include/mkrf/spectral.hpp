#pragma once

#include <vector>

#include "mkrf/analysis.hpp"
#include "mkrf/potentials.hpp"
#include "mkrf/trace.hpp"

namespace mkrf {

// Invariant sector: fields v W with v a function of tau. Rayleigh quotient
// int |W|^2 |grad v|^2 / int |W|^2 v^2 (times e^theta when weighted), v
// orthogonal to the constants (the holomorphic fields of the sector).
struct SectorEigen {
    double eigenvalue = 0.0;
    Field field;  // v on the grid
};
SectorEigen lambda_eig(const MetricState& s, const VectorFieldSpec& X, bool weighted);

struct SpectralReport {
    double lambda = 0.0;
    double lambda_X = 0.0;
    double a_W = 0.0;
    double W_norm_theta_sq = 0.0;
    double F_pi = 0.0;  // F_X(pi dbar u) = -a_W^2 ||W||^2_theta
    Field eigenvector;
};
SpectralReport project_holomorphic(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p);
// a_W and ||W||^2_theta only, no eigenproblems
void holomorphic_projection(const MetricState& s, const PotentialBundle& p, double& a_W, double& W_norm_theta_sq);

struct ExponentTable {
    int n = 1;
    Rational rho;
    int N = 0;
    std::vector<Rational> halves;  // delta_j / 2, j = 0..N
    Rational half_sum() const;
};
ExponentTable exponent_table(int n);

struct DifferenceInequalityRow {
    double t = 0.0;
    double lhs = 0.0;      // centered difference of Y
    double rhs1 = 0.0;     // -2 lambda_X Y - 2 lambda_X F_X(pi dbar u)
    double product = 0.0;  // prod Y(t - 2j)^{delta_j/2}
    double c_min = 0.0;
};
struct DifferenceInequalityAudit {
    ExponentTable table;
    std::vector<DifferenceInequalityRow> rows;
    double c_min = 0.0;
    std::size_t below_floor = 0;  // samples skipped as numerical zero
    bool bessel_ok = true;
    double bessel_worst = 0.0;    // max of -F_pi - Y (should be <= 0)
};
// Samples whose Y (or a lagged Y) is at or below `floor` are skipped.
DifferenceInequalityAudit theorem4_audit(const FlowTrace& trace, double floor = 0.0);

}  // namespace mkrf
