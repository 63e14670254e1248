#pragma once

#include <stdexcept>
#include <string>

namespace wvn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical precondition does not hold (energy outside a band, bad exponent, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Energy too close to a band edge: phi and conj(phi) are not independent there.
class DegenerateFloquetError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A divisor 2*pi*n + alpha (or 1 - exp(i alpha)) fell below the configured floor.
class SmallDivisorError : public DomainError {
public:
    SmallDivisorError(const std::string& what, int K, double phase_sum, int mode)
        : DomainError(what), K_(K), phase_sum_(phase_sum), mode_(mode) {}

    int K() const noexcept { return K_; }
    double phase_sum() const noexcept { return phase_sum_; }
    int mode() const noexcept { return mode_; }

private:
    int K_;
    double phase_sum_;
    int mode_;
};

/// The ODE integrator could not proceed (step size underflow, too many steps).
class IntegratorError : public Error {
public:
    IntegratorError(const std::string& what, double position)
        : Error(what), position_(position) {}
    double position() const noexcept { return position_; }

private:
    double position_;
};

/// An iterative numerical procedure did not converge (steering, fits, bisection).
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or input file, including missing files.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wvn
