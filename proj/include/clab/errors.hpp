#pragma once

#include <stdexcept>
#include <string>

namespace clab {

// Invalid input: bad model, bad grid, precondition violated. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A multiplier or operator is undefined on some eigenvalue. CLI exit code 2.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Request exceeds a configured hard limit (mode count, grid size). CLI exit code 2.
class ResourceError : public std::length_error {
public:
    explicit ResourceError(const std::string& what) : std::length_error(what) {}
};

// Malformed experiment configuration or a scheme that fails its self-check. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Quadrature did not converge or produced non-finite values. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clab
