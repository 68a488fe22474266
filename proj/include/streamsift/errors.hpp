#pragma once

#include <stdexcept>
#include <string>

namespace streamsift {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates its type invariants (probabilities, shapes, ranges).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition does not hold (support mismatch, non-positive concentration).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An observation has zero probability under every posterior sample.
class DegenerateEvidenceError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public FitError {
public:
    using FitError::FitError;
};

/// Input lies outside the domain a model was built for (grid lookup, histogram bounds).
class LookupError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. `field` holds the dotted path of the offending key when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace streamsift
