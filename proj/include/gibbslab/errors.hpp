#pragma once

#include <stdexcept>
#include <string>

namespace gibbslab {

// Invalid input: points outside the disk guard, bad matrices, bad configs.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A convergence or acceptance tolerance was not met.
class ToleranceError : public std::runtime_error {
public:
    ToleranceError(const std::string& what, double first, double second)
        : std::runtime_error(what), first_(first), second_(second) {}
    explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
    double first() const { return first_; }
    double second() const { return second_; }

private:
    double first_ = 0.0;
    double second_ = 0.0;
};

// Memory or size cap hit during enumeration.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough data for a fit or a statistic to be meaningful.
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Overflow/underflow that log-sum-exp could not rescue.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gibbslab
