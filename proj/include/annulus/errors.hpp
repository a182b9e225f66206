#pragma once

#include <stdexcept>
#include <string>

namespace annulus {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied value violates a precondition (non-finite input,
/// r <= 0, malformed partition, ...). The message names the offender.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// A pointwise derivative was requested exactly on a discontinuity line,
/// where it is undefined. Callers must perturb off the line.
class BoundaryPointError : public Error {
public:
    BoundaryPointError(const std::string& what, double x)
        : Error(what), x(x) {}
    double x;
};

/// A numerical routine could not reach the requested accuracy. Carries the
/// best estimate obtained and the error actually achieved.
class NumericalFailureError : public Error {
public:
    NumericalFailureError(const std::string& what, double best_estimate,
                          double achieved_error)
        : Error(what), best_estimate(best_estimate),
          achieved_error(achieved_error) {}
    double best_estimate;
    double achieved_error;
};

/// A mathematical precondition was found violated by sampling. Carries the
/// offending sample point and the value observed there.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& what, double x, double y, double value)
        : Error(what), x(x), y(y), value(value) {}
    double x;
    double y;
    double value;
};

/// The trajectory did not return to the section within the time guard.
class NoReturnError : public Error {
public:
    explicit NoReturnError(const std::string& what) : Error(what) {}
};

/// The trajectory escaped beyond the radius guard.
class EscapeError : public Error {
public:
    explicit EscapeError(const std::string& what) : Error(what) {}
};

/// A configuration file failed validation. The message names the field.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace annulus
