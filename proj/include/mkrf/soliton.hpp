#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mkrf/analysis.hpp"
#include "mkrf/flow.hpp"

namespace mkrf {

struct SolitonSolution {
    BackgroundId background = BackgroundId::CP1;
    double c = 0.0;
    MetricState state;
    double residual = 0.0;  // ||R - n - div X||_C0
    double rhs_residual = 0.0;  // C0 norm of the centered potential rhs
    int iterations = 0;
    int seed_index = 0;
};

struct NoSoliton {
    BackgroundId background = BackgroundId::CP1;
    double c = 0.0;
    double best_residual = 0.0;
    std::string reason;
};

using StationaryResult = std::variant<SolitonSolution, NoSoliton>;

struct StationaryOptions {
    int seeds = 5;
    int max_iterations = 60;
    double tolerance = 1e-11;       // on the centered rhs, C0
    double seed_amplitude = 0.15;
    std::uint64_t seed = 42;
};

// Damped Newton on the centered flow rhs with the mean of psi pinned.
// Throws NumericalFailure if the linearization is singular beyond its
// automorphism kernel.
StationaryResult stationary_solve(const BackgroundPtr& bg, double c, const StationaryOptions& opt = {});
// Newton from one explicit start; used by the multistart loop and by tests.
StationaryResult stationary_solve_from(const BackgroundPtr& bg, double c, const Field& start,
                                       const StationaryOptions& opt = {});

// Every seed's outcome, in seed order.
std::vector<StationaryResult> stationary_multistart(const BackgroundPtr& bg, double c,
                                                   const StationaryOptions& opt = {});

// c -> F_{cW}(W) at a fixed metric.
double futaki_of_c(const MetricState& s, double c);

struct SolitonConstant {
    double c = 0.0;
    double c_background = 0.0;  // root at the background metric
    double futaki_at_soliton = 0.0;
    bool refined = false;
};
// Root of c ↦ F_{cW}(W) in [-5, 5], bracketed at the background and refined
// on the stationary metric. Throws std::domain_error if there is no bracket.
SolitonConstant find_soliton_constant_report(const BackgroundPtr& bg);
double find_soliton_constant(const BackgroundPtr& bg);

// |W|^2 as a function of the moment coordinate, sampled at fixed moment
// values; invariant under the automorphisms generated by W.
Field moment_profile(const MetricState& s, const Field& moments);

enum class Verdict { Convergent, NonConvergent, Undecided };
std::string to_string(Verdict v);

struct ConditionReport {
    bool pass = false;
    double statistic = 0.0;
    std::string detail;
};

struct Classification {
    Verdict verdict = Verdict::Undecided;
    ConditionReport integrability;  // curvature residual integrable in time
    ConditionReport bounded_phi;    // normalized potential bounded
    ConditionReport exponential;    // Y decays exponentially
    ExpFit y_fit;
    Integrability res_p1;
    Integrability res_p3;
    double phi_slope = 0.0;
    double floor_Y = 0.0;
    double floor_res = 0.0;
    std::string note;
};

// Floors below which the sampled series are numerical zero.
double y_floor(const FlowTrace& trace);
double residual_floor(const FlowTrace& trace);

Classification classify_run(const FlowTrace& trace);

}  // namespace mkrf
