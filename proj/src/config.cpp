#include "mkrf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace mkrf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": not a number: '" + v + "'");
    }
    if (used != v.size()) throw std::invalid_argument(key + ": not a number: '" + v + "'");
    if (!std::isfinite(x)) throw std::invalid_argument(key + ": must be finite, got '" + v + "'");
    return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": integer out of range: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "background", "c", "T", "base", "perturbation", "amplitude", "grid", "scheme", "explicit_floor", "dt_init", "dt_min",
        "dt_max", "safety", "rtol", "atol", "sample_cadence", "snapshot_cadence", "divergence_guard", "adapt_grid", "adapt_threshold",
        "spectral_diagnostics", "seed", "trace_path", "snapshot_dir", "out_dir"};
    return keys;
}

void apply_config_key(FlowConfig& cfg, const std::string& key, const std::string& v) {
    if (key == "background") {
        cfg.background = parse_background(v);
    } else if (key == "c") {
        if (v == "soliton") {
            cfg.c_is_soliton = true;
            cfg.c = 0.0;
        } else {
            cfg.c_is_soliton = false;
            cfg.c = to_double(key, v);
        }
    } else if (key == "T") {
        cfg.T = to_double(key, v);
    } else if (key == "base") {
        cfg.base = v;
    } else if (key == "perturbation") {
        cfg.perturbation = v;
    } else if (key == "amplitude") {
        cfg.amplitude = to_double(key, v);
    } else if (key == "grid") {
        cfg.grid = static_cast<std::size_t>(to_unsigned(key, v));
    } else if (key == "scheme") {
        cfg.scheme = parse_scheme(v);
    } else if (key == "explicit_floor") {
        cfg.explicit_floor = to_double(key, v);
    } else if (key == "dt_init") {
        cfg.dt_init = to_double(key, v);
    } else if (key == "dt_min") {
        cfg.dt_min = to_double(key, v);
    } else if (key == "dt_max") {
        cfg.dt_max = to_double(key, v);
    } else if (key == "safety") {
        cfg.safety = to_double(key, v);
    } else if (key == "rtol") {
        cfg.rtol = to_double(key, v);
    } else if (key == "atol") {
        cfg.atol = to_double(key, v);
    } else if (key == "sample_cadence") {
        cfg.sample_cadence = to_double(key, v);
    } else if (key == "snapshot_cadence") {
        cfg.snapshot_cadence = to_double(key, v);
    } else if (key == "divergence_guard") {
        cfg.divergence_guard = to_double(key, v);
    } else if (key == "adapt_grid") {
        cfg.adapt_grid = to_bool(key, v);
    } else if (key == "adapt_threshold") {
        cfg.adapt_threshold = to_double(key, v);
    } else if (key == "spectral_diagnostics") {
        cfg.spectral_diagnostics = to_bool(key, v);
    } else if (key == "seed") {
        cfg.seed = to_unsigned(key, v);
    } else if (key == "trace_path") {
        cfg.trace_path = v;
    } else if (key == "snapshot_dir") {
        cfg.snapshot_dir = v;
    } else if (key == "out_dir") {
        cfg.out_dir = v;
    } else {
        throw std::invalid_argument("unknown key '" + key + "'");
    }
}

FlowConfig parse_config(std::istream& in, const std::string& origin) {
    FlowConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        const auto where = origin + ":" + std::to_string(line) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value", line);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + "empty key", line);
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'", line);
        try {
            apply_config_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + e.what(), line);
        }
    }
    for (const char* key : {"background", "c", "T"})
        if (!seen.count(key)) throw ConfigError(origin + ": missing required key '" + key + "'", 0);
    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what(), 0);
    }
    return cfg;
}

FlowConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
    return parse_config(in, path);
}

FlowConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string render_config(const FlowConfig& cfg) {
    std::ostringstream os;
    os << "background = " << to_string(cfg.background) << "\n";
    os << "c = " << (cfg.c_is_soliton ? std::string("soliton") : fmt(cfg.c)) << "\n";
    os << "T = " << fmt(cfg.T) << "\n";
    os << "base = " << cfg.base << "\n";
    os << "perturbation = " << cfg.perturbation << "\n";
    os << "amplitude = " << fmt(cfg.amplitude) << "\n";
    os << "grid = " << cfg.grid << "\n";
    os << "scheme = " << to_string(cfg.scheme) << "\n";
    os << "explicit_floor = " << fmt(cfg.explicit_floor) << "\n";
    os << "dt_init = " << fmt(cfg.dt_init) << "\n";
    os << "dt_min = " << fmt(cfg.dt_min) << "\n";
    os << "dt_max = " << fmt(cfg.dt_max) << "\n";
    os << "safety = " << fmt(cfg.safety) << "\n";
    os << "rtol = " << fmt(cfg.rtol) << "\n";
    os << "atol = " << fmt(cfg.atol) << "\n";
    os << "sample_cadence = " << fmt(cfg.sample_cadence) << "\n";
    os << "snapshot_cadence = " << fmt(cfg.snapshot_cadence) << "\n";
    os << "divergence_guard = " << fmt(cfg.divergence_guard) << "\n";
    os << "adapt_grid = " << (cfg.adapt_grid ? "true" : "false") << "\n";
    os << "adapt_threshold = " << fmt(cfg.adapt_threshold) << "\n";
    os << "spectral_diagnostics = " << (cfg.spectral_diagnostics ? "true" : "false") << "\n";
    os << "seed = " << cfg.seed << "\n";
    if (!cfg.trace_path.empty()) os << "trace_path = " << cfg.trace_path << "\n";
    if (!cfg.snapshot_dir.empty()) os << "snapshot_dir = " << cfg.snapshot_dir << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    return os.str();
}

}  // namespace mkrf
