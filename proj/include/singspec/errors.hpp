#pragma once

#include <stdexcept>
#include <string>

namespace singspec {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model/weight configuration violates one of the standing assumptions
/// (parameter ranges, rank conditions, atom/singularity overlap).
/// The CLI maps these to exit code 2.
class assumption_error : public error {
public:
    explicit assumption_error(const std::string& msg) : error(msg) {}
};

/// A numerical routine failed to reach its tolerance (quadrature
/// non-convergence, failed factorization, embedding failure).
/// The CLI maps these to exit code 3.
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

/// Invalid argument to an operation (out-of-domain input, bad sizes).
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

/// Configuration file / CLI usage problems. Exit code 1.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

} // namespace singspec
