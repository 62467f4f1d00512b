#pragma once

#include <stdexcept>
#include <string>

namespace precim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- numerical errors ---------------------------------------------------

struct NonFiniteError : Error {
    using Error::Error;
};

struct NotSymmetricError : Error {
    using Error::Error;
};

struct KTooLargeError : Error {
    using Error::Error;
};

struct SingularSigmaError : Error {
    using Error::Error;
};

struct RankDeficientLoadingsError : Error {
    using Error::Error;
};

struct NotPositiveDefiniteError : Error {
    using Error::Error;
};

struct ShapeMismatchError : Error {
    using Error::Error;
};

struct DenominatorNonPositiveError : Error {
    using Error::Error;
};

/// A row regression produced tau^2 at or below the configured floor.
/// Carries the offending row so callers can abort or skip it.
struct DegenerateTauError : Error {
    DegenerateTauError(std::string msg, long row_index, double tau_sq_value)
        : Error(std::move(msg)), row(row_index), tau_sq(tau_sq_value) {}
    long row;
    double tau_sq;
};

struct DegenerateDirectionError : Error {
    using Error::Error;
};

struct PortfolioWipedOutError : Error {
    using Error::Error;
};

// -- data / configuration errors ----------------------------------------

struct ParseError : Error {
    using Error::Error;
};

struct MissingValueError : ParseError {
    using ParseError::ParseError;
};

struct NonMonotoneDatesError : ParseError {
    using ParseError::ParseError;
};

struct UsageError : Error {
    using Error::Error;
};

struct ConfigParseError : Error {
    using Error::Error;
};

}  // namespace precim
