#pragma once

#include <istream>
#include <string>
#include <vector>

#include "mkrf/flow.hpp"

namespace mkrf {

// Raised for malformed config files; carries the offending line (0 if the
// problem is not tied to one line, e.g. a missing key).
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& what, int line) : std::invalid_argument(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Flat key = value text, '#' starts a comment. Required keys: background, c, T.
// c may be the word "soliton", which sets c_is_soliton.
FlowConfig parse_config(std::istream& in, const std::string& origin = "<config>");
FlowConfig parse_config_file(const std::string& path);
FlowConfig parse_config_text(const std::string& text);

// Applies one key = value pair; used by the parser and by sweeps.
void apply_config_key(FlowConfig& cfg, const std::string& key, const std::string& value);
const std::vector<std::string>& config_keys();

// Canonical key = value rendering, parseable by parse_config.
std::string render_config(const FlowConfig& cfg);

}  // namespace mkrf
