#pragma once

#include <stdexcept>
#include <string>

namespace wicksde {

// Base class for all library failures.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input: expression syntax, bad config values, unusable grids.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Mathematically undefined request (division by zero, 0^-k, empty domain).
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

// A numeric procedure failed to reach its tolerance or hit an invalid state
// (quadrature non-convergence, indefinite covariance, excessive truncation loss).
struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace wicksde
