#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace causalift {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dataset, CSV file or argument violates a documented contract.
class DataError : public Error {
public:
    using Error::Error;
};

/// Zero-variance input where a non-constant one is required.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Regressors are linearly dependent (rank-deficient design).
class CollinearityError : public Error {
public:
    using Error::Error;
};

/// Simulation produced a non-finite value.
class InstabilityError : public Error {
public:
    InstabilityError(std::string variable, std::size_t step, const std::string& what)
        : Error(what), variable_(std::move(variable)), step_(step) {}

    const std::string& variable() const noexcept { return variable_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::string variable_;
    std::size_t step_;
};

/// An iterative solver stopped before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double duality_gap)
        : Error(what), duality_gap_(duality_gap) {}

    double duality_gap() const noexcept { return duality_gap_; }

private:
    double duality_gap_;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// JSON document does not match its schema; `path()` points at the offending field.
class SchemaError : public Error {
public:
    SchemaError(std::string path, std::string message)
        : Error(path + ": " + message), path_(std::move(path)), message_(std::move(message)) {}

    const std::string& path() const noexcept { return path_; }
    /// The diagnostic without the path prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

/// An expert edit does not apply to the graph it targets.
class EditError : public Error {
public:
    explicit EditError(const std::string& what, std::string path = {}) : Error(what), path_(std::move(path)) {}
    /// Offending entry, e.g. "add[2].lag"; empty when not tied to one entry.
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace causalift
