#pragma once

#include <stdexcept>
#include <string>

namespace segrelab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on the inputs was not met.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An iterative linear or nonlinear solve did not reach its tolerance.
class SolveError : public Error {
public:
    SolveError(const std::string& what, double achieved)
        : Error(what + " (achieved residual " + std::to_string(achieved) + ")"), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

/// A nodal value left [-tol, 1+tol] during time stepping.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

} // namespace segrelab
