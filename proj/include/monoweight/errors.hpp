#pragma once

#include <stdexcept>
#include <string>

namespace monoweight {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the documented domain of an operation (bad exponent vector,
/// shape outside the orthant, malformed arguments).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A weight vector with a negative or non-finite entry.
class InvalidWeight : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Integrability exponent outside the admissible range of the operation.
class ExponentOutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// p >= D: the Sobolev embedding is critical or supercritical. Callers route
/// p == D to the exponential (Trudinger) functional and p > D to the Hoelder
/// (Morrey) checks.
class CriticalRegime : public ExponentOutOfRange {
 public:
  CriticalRegime(double p, double D)
      : ExponentOutOfRange("p = " + std::to_string(p) +
                           " is not subcritical for effective dimension D = " +
                           std::to_string(D) +
                           (p == D ? " (critical: use the exponential functional)"
                                   : " (supercritical: use the Hoelder bound)")),
        p_(p),
        D_(D) {}
  double p() const noexcept { return p_; }
  double D() const noexcept { return D_; }
  bool critical() const noexcept { return p_ == D_; }

 private:
  double p_;
  double D_;
};

/// A computation that failed numerically: non-finite integrand, divergent
/// tail, solver non-convergence, too low Monte Carlo acceptance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace monoweight
