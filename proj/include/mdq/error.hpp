#pragma once

#include <stdexcept>
#include <string>

namespace mdq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient or datum could not be evaluated (non-finite, threw) at a probe point.
class DataError : public Error {
public:
    using Error::Error;
};

/// Kernel preprocessing failed: non-integrable tail, quadrature did not converge.
class KernelError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or unachievable configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A stencil weight would be negative (e.g. diffusion not diagonally dominant).
class MonotonicityError : public Error {
public:
    using Error::Error;
};

/// A time step could not be taken (CFL violated under enforce mode).
class StepError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration hit its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Reference quadrature could not reach the requested tolerance.
class OracleError : public Error {
public:
    using Error::Error;
};

}  // namespace mdq
