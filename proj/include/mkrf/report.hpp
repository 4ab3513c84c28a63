#pragma once

#include <string>
#include <vector>

#include "mkrf/io.hpp"
#include "mkrf/soliton.hpp"
#include "mkrf/spectral.hpp"

namespace mkrf {

// Identity residuals evaluated on one snapshot.
struct SnapshotAudit {
    double t = 0.0;
    double bochner = 0.0;         // |Bochner-Kodaira residual|
    double bochner_scale = 0.0;   // largest of its four terms
    double weighted_divergence = 0.0;
    double divergence_gap = 0.0;  // Christoffel vs Laplacian route for div X
    double mabuchi_gap = 0.0;     // flow value vs straight-path value, NaN if the path degenerates
    double class_residual = 0.0;
    double eigen_low = 0.0;       // e^{-osc theta} lambda
    double eigen_high = 0.0;      // e^{osc theta} lambda
    double lambda_X = 0.0;
};
std::vector<SnapshotAudit> audit_snapshots(const FlowTrace& trace);

// Bounded-quantity monitor: late maximum against 10x the early maximum.
struct Monitor {
    std::string name;
    double early_max = 0.0;  // over t in [0, 1]
    double overall_max = 0.0;
    bool ok = true;
};
std::vector<Monitor> monitor_audit(const FlowTrace& trace);

// Pointwise check e^{-osc theta} lambda <= lambda_X <= e^{osc theta} lambda on
// every sample; returns the number of violations.
std::size_t eigenvalue_sandwich_violations(const FlowTrace& trace, double slack = 1e-9);

Json classification_json(const Classification& c);
Json c0_json(const C0Report& c);
Json difference_inequality_json(const DifferenceInequalityAudit& a);
Json decay_json(const DecayAudit& a);
Json snapshot_audit_json(const std::vector<SnapshotAudit>& a);
Json monitor_json(const std::vector<Monitor>& m);
Json soliton_json(const StationaryResult& r);

// Everything the report command emits for one trace.
Json full_report(const FlowTrace& trace);

}  // namespace mkrf
