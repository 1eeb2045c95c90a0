#pragma once

#include <stdexcept>
#include <string>

namespace dispersim {

/// Requested work exceeds a configured size cap (ring length, panel budget, grid points).
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical evaluator could not certify its requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// Initial data too close to a truncation boundary for the requested time.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Factorization / eigensolver breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dispersim
