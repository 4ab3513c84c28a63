#include "mkrf/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace mkrf {

const char* const trace_header =
    "t,Y_X,b,mu_X,F_X,res_C0,res_L2,grad_u_C0,lap_u_C0,phidot_C0,X2_max,h_min,h_max,lambda,lambda_X,theta_min,"
    "theta_max";

namespace {

using Member = double DiagnosticsRecord::*;

const std::vector<std::pair<const char*, Member>>& main_columns() {
    static const std::vector<std::pair<const char*, Member>> cols = {
        {"t", &DiagnosticsRecord::t},
        {"Y_X", &DiagnosticsRecord::Y_X},
        {"b", &DiagnosticsRecord::b},
        {"mu_X", &DiagnosticsRecord::mu_X},
        {"F_X", &DiagnosticsRecord::F_X},
        {"res_C0", &DiagnosticsRecord::res_C0},
        {"res_L2", &DiagnosticsRecord::res_L2},
        {"grad_u_C0", &DiagnosticsRecord::grad_u_C0},
        {"lap_u_C0", &DiagnosticsRecord::lap_u_C0},
        {"phidot_C0", &DiagnosticsRecord::phidot_C0},
        {"X2_max", &DiagnosticsRecord::X2_max},
        {"h_min", &DiagnosticsRecord::h_min},
        {"h_max", &DiagnosticsRecord::h_max},
        {"lambda", &DiagnosticsRecord::lambda},
        {"lambda_X", &DiagnosticsRecord::lambda_X},
        {"theta_min", &DiagnosticsRecord::theta_min},
        {"theta_max", &DiagnosticsRecord::theta_max},
    };
    return cols;
}

const std::vector<std::pair<const char*, Member>>& aux_columns() {
    static const std::vector<std::pair<const char*, Member>> cols = {
        {"t", &DiagnosticsRecord::t},
        {"mean_rhs", &DiagnosticsRecord::mean_rhs},
        {"kappa_f", &DiagnosticsRecord::kappa_f},
        {"u_min", &DiagnosticsRecord::u_min},
        {"u_max", &DiagnosticsRecord::u_max},
        {"psi_dev_min", &DiagnosticsRecord::psi_dev_min},
        {"psi_dev_max", &DiagnosticsRecord::psi_dev_max},
        {"psi_C0", &DiagnosticsRecord::psi_C0},
        {"u_minus_b_C0", &DiagnosticsRecord::u_minus_b_C0},
        {"grad_u_L2", &DiagnosticsRecord::grad_u_L2},
        {"a_W", &DiagnosticsRecord::a_W},
        {"W_norm_theta_sq", &DiagnosticsRecord::W_norm_theta_sq},
        {"F_pi", &DiagnosticsRecord::F_pi},
        {"lap_theta_C0", &DiagnosticsRecord::lap_theta_C0},
        {"poincare", &DiagnosticsRecord::poincare},
        {"class_residual", &DiagnosticsRecord::class_residual},
        {"phi_C0", &DiagnosticsRecord::phi_C0},
        {"dt", &DiagnosticsRecord::dt},
    };
    return cols;
}

void ensure_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_out(const std::string& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void write_columns(const std::string& path, const FlowTrace& trace,
                   const std::vector<std::pair<const char*, Member>>& cols) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].first;
    out << "\n";
    for (const auto& r : trace.records) {
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << format_double(r.*(cols[i].second));
        out << "\n";
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line) {
    if (cell == "nan" || cell == "-nan") return NAN;
    if (cell == "inf") return INFINITY;
    if (cell == "-inf") return -INFINITY;
    std::size_t used = 0;
    try {
        const double v = std::stod(cell, &used);
        if (used == cell.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" + cell + "'");
}

void read_columns(const std::string& path, std::vector<DiagnosticsRecord>& records,
                  const std::vector<std::pair<const char*, Member>>& cols, bool create) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (create && header.size() != cols.size()) throw std::runtime_error(path + ":1: header does not match the trace layout");
    std::vector<Member> map;
    for (const auto& h : header) {
        auto it = std::find_if(cols.begin(), cols.end(), [&](const auto& c) { return h == c.first; });
        if (it == cols.end()) throw std::runtime_error(path + ":1: unknown column '" + h + "'");
        if (create && it != cols.begin() + static_cast<std::ptrdiff_t>(map.size()))
            throw std::runtime_error(path + ":1: column '" + h + "' out of order");
        map.push_back(it->second);
    }
    std::size_t row = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != map.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(map.size()) +
                                     " fields, got " + std::to_string(cells.size()));
        if (create) records.emplace_back();
        if (row >= records.size()) throw std::runtime_error(path + ": more rows than the trace");
        for (std::size_t i = 0; i < map.size(); ++i) records[row].*(map[i]) = parse_cell(cells[i], path, lineno);
        ++row;
    }
    if (!create && row != records.size()) throw std::runtime_error(path + ": row count differs from the trace");
}

Json field_json(const Field& f) { return Json(std::vector<double>(f.data(), f.data() + f.size())); }

Field json_field(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Field>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Termination parse_termination(const std::string& s) {
    for (auto t : {Termination::ReachedHorizon, Termination::Degenerate, Termination::DivergenceGuard,
                   Termination::NumericalFailure})
        if (to_string(t) == s) return t;
    throw std::runtime_error("unknown termination '" + s + "'");
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_trace_csv(const std::string& path, const FlowTrace& trace) { write_columns(path, trace, main_columns()); }

void write_aux_csv(const std::string& path, const FlowTrace& trace) { write_columns(path, trace, aux_columns()); }

void write_trace_meta(const std::string& path, const FlowTrace& trace) {
    Json j;
    j["background"] = trace.background;
    j["n"] = trace.n;
    j["volume"] = trace.volume;
    j["c"] = trace.c;
    j["grid"] = trace.grid;
    j["horizon"] = trace.horizon;
    j["termination"] = to_string(trace.termination);
    j["message"] = trace.message;
    j["kappa_f0"] = trace.kappa_f0;
    j["u0_average"] = trace.u0_average;
    j["mu_anchor"] = trace.mu_anchor;
    j["steps_accepted"] = trace.steps_accepted;
    j["steps_rejected"] = trace.steps_rejected;
    j["regrids"] = trace.regrids;
    write_json(path, j);
}

std::string aux_path_for(const std::string& csv_path) {
    fs::path p(csv_path);
    return (p.parent_path() / (p.stem().string() + "_aux.csv")).string();
}

std::string meta_path_for(const std::string& csv_path) {
    fs::path p(csv_path);
    return (p.parent_path() / (p.stem().string() + ".meta.json")).string();
}

std::vector<std::string> write_trace_bundle(const std::string& csv_path, const FlowTrace& trace) {
    write_trace_csv(csv_path, trace);
    write_aux_csv(aux_path_for(csv_path), trace);
    write_trace_meta(meta_path_for(csv_path), trace);
    return {csv_path, aux_path_for(csv_path), meta_path_for(csv_path)};
}

FlowTrace read_trace(const std::string& csv_path) {
    FlowTrace trace;
    read_columns(csv_path, trace.records, main_columns(), true);
    if (trace.records.empty()) throw std::runtime_error(csv_path + ": no samples");
    const auto aux = aux_path_for(csv_path);
    if (fs::exists(aux)) read_columns(aux, trace.records, aux_columns(), false);
    const auto meta = meta_path_for(csv_path);
    if (fs::exists(meta)) {
        const Json j = read_json(meta);
        trace.background = j.at("background").get<std::string>();
        trace.n = j.at("n").get<int>();
        trace.volume = j.at("volume").get<double>();
        trace.c = j.at("c").get<double>();
        trace.grid = j.at("grid").get<std::size_t>();
        trace.horizon = j.at("horizon").get<double>();
        trace.termination = parse_termination(j.at("termination").get<std::string>());
        trace.message = j.value("message", "");
        trace.kappa_f0 = j.at("kappa_f0").get<double>();
        trace.u0_average = j.at("u0_average").get<double>();
        trace.mu_anchor = j.value("mu_anchor", 0.0);
        trace.steps_accepted = j.value("steps_accepted", std::size_t{0});
        trace.steps_rejected = j.value("steps_rejected", std::size_t{0});
        trace.regrids = j.value("regrids", std::size_t{0});
    } else {
        trace.horizon = trace.records.back().t;
    }
    return trace;
}

Json snapshot_json(const MetricState& s, const VectorFieldSpec& X) {
    const auto p = modified_potential(s, X);
    Json j;
    j["background"] = s.background().name;
    j["n"] = s.dim();
    j["grid"] = s.size();
    j["c"] = X.c;
    j["t"] = s.time();
    j["nodes"] = field_json(s.background().tau);
    if (s.grid().map().active()) j["grid_map"] = {{"delta", s.grid().map().delta}, {"side", s.grid().map().side}};
    j["psi"] = field_json(s.psi());
    j["h"] = field_json(s.volume_ratio());
    j["R"] = field_json(s.scalar_curvature());
    j["theta"] = field_json(p.theta);
    j["f"] = field_json(p.f);
    j["u"] = field_json(p.u);
    return j;
}

void write_snapshot(const std::string& path, const MetricState& s, const VectorFieldSpec& X) {
    write_json(path, snapshot_json(s, X));
}

MetricState read_snapshot(const std::string& path) {
    const Json j = read_json(path);
    const auto id = parse_background(j.at("background").get<std::string>());
    const Field nodes = json_field(j.at("nodes"));
    GridMap map;
    if (j.contains("grid_map")) {
        map.delta = j["grid_map"].at("delta").get<double>();
        map.side = j["grid_map"].at("side").get<int>();
    }
    const auto bg = make_background(id, static_cast<std::size_t>(nodes.size()), map);
    if ((bg->tau - nodes).cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error(path + ": nodes do not match a " + bg->name + " grid of size " +
                                 std::to_string(nodes.size()));
    return MetricState(bg, json_field(j.at("psi")), j.at("t").get<double>());
}

double snapshot_c(const std::string& path) { return read_json(path).value("c", 0.0); }

std::vector<std::string> list_snapshots(const std::string& dir) {
    std::vector<std::pair<double, std::string>> found;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: '" + dir + "'");
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        const Json j = read_json(e.path().string());
        if (!j.contains("psi") || !j.contains("t")) continue;
        found.emplace_back(j.at("t").get<double>(), e.path().string());
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(f.second);
    return out;
}

std::vector<std::string> write_snapshots(const std::string& dir, const FlowTrace& trace) {
    fs::create_directories(dir);
    std::vector<std::string> out;
    const VectorFieldSpec X{trace.c};
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.json", i);
        const auto path = (fs::path(dir) / name).string();
        write_snapshot(path, trace.snapshots[i], X);
        out.push_back(path);
    }
    return out;
}

void read_series(const std::string& path, std::vector<double>& t, std::vector<double>& v) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    t.clear();
    v.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (lineno == 1 && !cells.empty()) {
            // header row if the first cell is not numeric
            char* end = nullptr;
            std::strtod(cells[0].c_str(), &end);
            if (end == cells[0].c_str()) continue;
        }
        if (cells.size() == 1) {
            t.push_back(static_cast<double>(t.size()));
            v.push_back(parse_cell(cells[0], path, lineno));
        } else if (cells.size() == 2) {
            t.push_back(parse_cell(cells[0], path, lineno));
            v.push_back(parse_cell(cells[1], path, lineno));
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected one or two columns");
        }
    }
}

void write_json(const std::string& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace mkrf
