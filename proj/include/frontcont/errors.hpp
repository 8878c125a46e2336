#pragma once

#include <stdexcept>
#include <string>

namespace frontcont {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value; `key` names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Field or operator does not match the grid it is used with.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value encountered at a node.
class NumericError : public Error {
public:
    using Error::Error;
};

/// State left the admissible set (ellipticity or parameter guard).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A structural hypothesis on the nonlinearity or parameters fails.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Seed requested outside the small-amplitude range.
class SeedRangeError : public Error {
public:
    using Error::Error;
};

/// Transversal eigensolver failure, or far field not settled.
class EigenError : public Error {
public:
    using Error::Error;
};

/// Newton or linear solver failure.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::string guard = {})
        : Error(what), guard_(std::move(guard)) {}
    /// Name of the admissibility guard that tripped, empty otherwise.
    const std::string& guard() const { return guard_; }

private:
    std::string guard_;
};

}  // namespace frontcont
