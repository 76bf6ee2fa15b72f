#pragma once

#include <stdexcept>
#include <string>

namespace holoseries {

/// Invalid model data or configuration (bad dimensions, negative intensity, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure on an otherwise valid input (blow-up, zero crossing, ...).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace holoseries
