#pragma once

#include <stdexcept>
#include <string>

namespace wemig {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed container header (bad magic, version, dtype, rank).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Payload shorter or longer than its header announces.
class LengthError : public Error {
public:
    using Error::Error;
};

/// Non-finite samples or otherwise unusable values.
class DataError : public Error {
public:
    using Error::Error;
};

/// Argument outside the admissible numeric range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Violated precondition of an operator (off-shell ray, scatterer at the
/// surface, mismatched axes).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Symbol evaluated outside its propagating domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value; raised before any compute starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Axis mismatch or a depth interval that is not a whole number of steps.
class AxisError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Root finding for the inverse of the double-square-root symbol failed.
class InversionError : public Error {
public:
    using Error::Error;
};

/// Ray left the model before completing a single step.
class EmptyPathError : public Error {
public:
    using Error::Error;
};

/// Depth-parameterized ray became horizontal.
class TurningPointError : public Error {
public:
    TurningPointError(const std::string& what, double z) : Error(what), z_(z) {}
    double depth() const noexcept { return z_; }

private:
    double z_;
};

/// Numerical contract failure (dot test above tolerance and similar).
class NumericalContractError : public Error {
public:
    using Error::Error;
};

}  // namespace wemig
