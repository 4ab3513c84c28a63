#pragma once

#include <string>
#include <vector>

#include "mkrf/metric.hpp"

namespace mkrf {

enum class Termination { ReachedHorizon, Degenerate, DivergenceGuard, NumericalFailure };

std::string to_string(Termination t);
int exit_code(Termination t);

struct DiagnosticsRecord {
    double t = 0.0;
    double Y_X = 0.0;
    double b = 0.0;
    double mu_X = 0.0;
    double F_X = 0.0;
    double res_C0 = 0.0;
    double res_L2 = 0.0;
    double grad_u_C0 = 0.0;
    double lap_u_C0 = 0.0;
    double phidot_C0 = 0.0;
    double X2_max = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    double lambda = 0.0;
    double lambda_X = 0.0;
    double theta_min = 0.0;
    double theta_max = 0.0;

    // auxiliary columns (written to the companion _aux.csv)
    double mean_rhs = 0.0;     // dropped m-mean of the potential rhs
    double kappa_f = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double psi_dev_min = 0.0;  // min of psi(t) - psi(0)
    double psi_dev_max = 0.0;
    double psi_C0 = 0.0;
    double u_minus_b_C0 = 0.0;
    double grad_u_L2 = 0.0;
    double a_W = 0.0;
    double W_norm_theta_sq = 0.0;
    double F_pi = 0.0;         // F_X of the holomorphic projection of dbar u
    double lap_theta_C0 = 0.0;
    double poincare = 0.0;
    double class_residual = 0.0;
    double phi_C0 = 0.0;       // filled by the constant-channel reconstruction
    double dt = 0.0;           // step size in use when the sample was taken
};

struct FlowTrace {
    std::string background;
    int n = 1;
    double volume = 0.0;
    double c = 0.0;
    std::size_t grid = 0;
    double horizon = 0.0;
    std::vector<DiagnosticsRecord> records;
    std::vector<MetricState> snapshots;
    Termination termination = Termination::ReachedHorizon;
    std::string message;
    double kappa_f0 = 0.0;   // Ricci-potential constant of the initial metric
    double u0_average = 0.0; // (1/V) int u0 e^theta0 omega0^n
    double mu_anchor = 0.0;  // path value of the modified Mabuchi energy at t = 0
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    std::size_t regrids = 0;

    std::vector<double> times() const;
    std::vector<double> column(double DiagnosticsRecord::*field) const;
};

}  // namespace mkrf
