#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkrf/functionals.hpp"
#include "mkrf/spectral.hpp"
#include "mkrf/trace.hpp"

namespace mkrf {

// Auto runs RK4 while its stability bound allows steps of at least
// explicit_floor and switches to Rosenbrock once the metric gets stiff.
enum class Scheme { RK4, Rosenbrock, Auto };
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct FlowConfig {
    BackgroundId background = BackgroundId::CP1;
    double c = 0.0;
    bool c_is_soliton = false;  // resolve c to the soliton coefficient before running
    std::string base = "background";  // background | soliton
    std::string perturbation = "mixed";
    double amplitude = 0.0;
    std::size_t grid = 129;
    double T = 10.0;
    Scheme scheme = Scheme::Auto;
    double explicit_floor = 1e-4;
    double dt_init = 1e-3;
    double dt_min = 1e-9;
    double dt_max = 0.05;
    double safety = 0.8;
    double rtol = 1e-9;
    double atol = 1e-11;
    double sample_cadence = 0.05;
    double snapshot_cadence = 1.0;
    double divergence_guard = 1e3;
    // cluster nodes at a pole once h_max exceeds adapt_threshold
    bool adapt_grid = true;
    double adapt_threshold = 8.0;
    bool spectral_diagnostics = true;
    std::uint64_t seed = 42;
    std::string trace_path;     // empty: <out_dir>/trace.csv
    std::string snapshot_dir;   // empty: <out_dir>/snapshots
    std::string out_dir = ".";
    // relative potential added under the perturbation (e.g. a soliton)
    std::optional<Field> base_psi;
};

void validate(const FlowConfig& cfg);

// Perturbation shape on the reference coordinate, max |shape| = 1, m-centered.
// Families: none, p2, p3, mixed (p2 + p3/2), cos, random (seeded Legendre 2..6).
Field perturbation_shape(const BackgroundGeometry& bg, const std::string& family, std::uint64_t seed);
Field initial_psi(const FlowConfig& cfg, const BackgroundPtr& bg);

// psi_dot = log h + psi + theta + f0, before the constant is dropped.
Field rhs(const MetricState& s, const VectorFieldSpec& X);
// m-centered rhs and the dropped mean
Field centered_rhs(const MetricState& s, const VectorFieldSpec& X, double* mean = nullptr);
// Jacobian of the centered rhs with respect to psi.
Matrix rhs_jacobian(const MetricState& s, const VectorFieldSpec& X);

class StepRejected : public std::runtime_error {
public:
    explicit StepRejected(const std::string& what) : std::runtime_error(what) {}
};

// One step of the centered potential flow. Throws StepRejected if any stage
// leaves the Kaehler cone.
MetricState step(const MetricState& s, const VectorFieldSpec& X, double dt, Scheme scheme = Scheme::RK4);
// Rosenbrock step also reports the embedded error estimate.
MetricState step_with_error(const MetricState& s, const VectorFieldSpec& X, double dt, Field& error);

// Largest |eigenvalue| of the rhs Jacobian by power iteration.
double stiffness_estimate(const MetricState& s, const VectorFieldSpec& X, int iterations = 40);

DiagnosticsRecord sample_diagnostics(const MetricState& s, const VectorFieldSpec& X, const Field& psi0,
                                     bool spectral = true);

// Runs the flow; numerical trouble is reported as termination. Throws
// DegenerateMetric only when the initial potential is already inadmissible.
FlowTrace run(const FlowConfig& cfg);
FlowTrace run(const FlowConfig& cfg, const BackgroundPtr& bg);

struct C0Report {
    double c0 = 0.0;              // from the Y integral, Simpson in time
    double c0_trapezoid = 0.0;
    double truncation_bound = 0.0;  // (1/V) e^{-T} sup Y
    double c0_channel = 0.0;       // initial value selecting the bounded constant channel
    double u0_average = 0.0;
};
C0Report compute_c0(const FlowTrace& trace);

// Constant part A(t) of phi = psi - psi(0) + A(t); forward integration of
// A' = A + g from A(0) = c0.
std::vector<double> constant_channel_forward(const FlowTrace& trace, double c0);
// Bounded solution of the same ODE, integrated backward from the horizon.
std::vector<double> constant_channel_stable(const FlowTrace& trace);
// ||phi(t)||_C0 using the forward channel with the given c0.
std::vector<double> normalized_phi(const FlowTrace& trace, double c0);
// ||phi(t)||_C0 using the bounded channel.
std::vector<double> normalized_phi_stable(const FlowTrace& trace);

// Fills mu_X, phi_C0 and phidot_C0 once the whole run is known.
void finalize_trace(FlowTrace& trace);

// Finite-difference-in-time residuals (C0 norms) of the evolution identities
// for v = -phi_dot; delta bounds the state perturbation used for d/dt.
struct EvolutionResiduals {
    double first = 0.0;
    double gradient = 0.0;
    double laplacian = 0.0;
    double h_evolution = 0.0;
};
EvolutionResiduals evolution_identity_residuals(const MetricState& s, const VectorFieldSpec& X, double delta);

}  // namespace mkrf
