#pragma once

#include <string>
#include <vector>

#include "mkrf/config.hpp"
#include "mkrf/report.hpp"

namespace mkrf {

struct SimulationOutcome {
    FlowTrace trace;
    FlowConfig config;  // with c and the base potential resolved
    std::vector<std::string> outputs;
    int exit_status = 0;
    Json manifest;
};

// Resolves c = soliton and base = soliton, then runs. Throws std::invalid_argument
// when the request cannot be met (e.g. a soliton base where none exists).
FlowConfig resolve_config(const FlowConfig& cfg);
// Runs and writes trace, sidecars, snapshots and manifest.json under cfg.out_dir.
SimulationOutcome simulate(const FlowConfig& cfg, bool write_snapshots = true);

// Runs the template once per value with `parameter` overridden, using up to
// `threads` workers; members write into <out_dir>/<parameter>_<value>.
Json sweep(const FlowConfig& base, const std::string& parameter, const std::vector<std::string>& values,
           unsigned threads);

// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace mkrf
