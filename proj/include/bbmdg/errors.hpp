#pragma once

#include <stdexcept>
#include <string>

namespace bbmdg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidMeshError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DegenerateMonitorError : public Error {
public:
    using Error::Error;
};

class UnsupportedBasisError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DegeneratePeakError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when a linear system inside a nonlinear solve cannot be factorized.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// Raised when the correction denominator <grad, z> of a moving-mesh step vanishes.
class DegenerateCorrectionError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require_size(std::size_t got, std::size_t expected, const char* what)
{
    if (got != expected) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                             ", got " + std::to_string(got));
    }
}

} // namespace detail
} // namespace bbmdg
