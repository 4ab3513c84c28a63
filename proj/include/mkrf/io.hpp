#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mkrf/flow.hpp"

namespace mkrf {

using Json = nlohmann::json;

extern const char* const trace_header;

// The 17 trace columns; aux columns go to a sidecar (<stem>_aux.csv) and the
// run-level constants to <stem>.meta.json, so classify can work from files.
void write_trace_csv(const std::string& path, const FlowTrace& trace);
void write_aux_csv(const std::string& path, const FlowTrace& trace);
void write_trace_meta(const std::string& path, const FlowTrace& trace);
// Writes all three next to each other; returns the paths written.
std::vector<std::string> write_trace_bundle(const std::string& csv_path, const FlowTrace& trace);

std::string aux_path_for(const std::string& csv_path);
std::string meta_path_for(const std::string& csv_path);

// Reads the trace CSV plus the sidecars if they exist. Throws std::runtime_error
// on a malformed file.
FlowTrace read_trace(const std::string& csv_path);

Json snapshot_json(const MetricState& s, const VectorFieldSpec& X);
void write_snapshot(const std::string& path, const MetricState& s, const VectorFieldSpec& X);
// Rebuilds the state on a fresh background of the recorded kind and size.
MetricState read_snapshot(const std::string& path);
double snapshot_c(const std::string& path);
// Snapshot files in a directory, ordered by time.
std::vector<std::string> list_snapshots(const std::string& dir);
std::vector<std::string> write_snapshots(const std::string& dir, const FlowTrace& trace);

// Two-column (t, value) or single-column series; a header row is optional.
void read_series(const std::string& path, std::vector<double>& t, std::vector<double>& v);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

std::string format_double(double x);

}  // namespace mkrf
