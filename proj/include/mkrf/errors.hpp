#pragma once

#include <stdexcept>
#include <string>

namespace mkrf {

// The state left the Kaehler cone (h <= 0) or is otherwise unusable.
class DegenerateMetric : public std::runtime_error {
public:
    explicit DegenerateMetric(const std::string& what) : std::runtime_error(what) {}
};

class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mkrf
