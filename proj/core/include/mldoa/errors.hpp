#pragma once

#include <stdexcept>
#include <string>

namespace mldoa {

/// Raised when a run configuration (file or in-memory) fails validation.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an iterative or quadrature routine cannot meet its contract.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mldoa
