#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "monoweight/errors.hpp"

namespace monoweight {

/// Exponent vector A >= 0 of the monomial weight x^A = |x_1|^{A_1}...|x_n|^{A_n}.
///
/// The effective dimension D = A_1 + ... + A_n + n and the number k of
/// strictly positive entries are recomputed from A on every call, so they
/// can never go stale.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> exponents) : a_(std::move(exponents)) {
    if (a_.empty()) throw InvalidWeight("weight vector must have n >= 1 entries");
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (!std::isfinite(a_[i]) || a_[i] < 0.0)
        throw InvalidWeight("weight exponent A_" + std::to_string(i + 1) + " = " +
                            std::to_string(a_[i]) + " must be finite and >= 0");
    }
  }
  WeightVector(std::initializer_list<double> exponents)
      : WeightVector(std::vector<double>(exponents)) {}

  /// The zero weight in dimension n.
  static WeightVector zero(std::size_t n) { return WeightVector(std::vector<double>(n, 0.0)); }

  std::size_t n() const noexcept { return a_.size(); }
  double operator[](std::size_t i) const noexcept { return a_[i]; }
  std::span<const double> exponents() const noexcept { return a_; }

  double D() const noexcept {
    return std::accumulate(a_.begin(), a_.end(), 0.0) + static_cast<double>(a_.size());
  }

  std::size_t k() const noexcept {
    std::size_t count = 0;
    for (double a : a_) count += a > 0.0 ? 1 : 0;
    return count;
  }

  bool positive(std::size_t i) const noexcept { return a_[i] > 0.0; }

  /// x lies in the closure of R^n_* (x_i >= 0 wherever A_i > 0).
  bool in_closed_orthant(std::span<const double> x) const noexcept {
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (a_[i] > 0.0 && x[i] < 0.0) return false;
    return true;
  }

  /// |x_1|^{A_1}...|x_n|^{A_n}, with 0^0 = 1.
  double weight(std::span<const double> x) const noexcept {
    double w = 1.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (a_[i] > 0.0) w *= std::pow(std::abs(x[i]), a_[i]);
    return w;
  }

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> a_;
};

/// Marker for p' = p/(p-1) when p = 1.
inline constexpr double kInfiniteConjugate = std::numeric_limits<double>::infinity();

/// Integrability exponent p together with its derived exponents for a fixed D.
struct Exponents {
  double p;
  double D;

  /// p' = p/(p-1); infinite at p = 1.
  double conjugate() const noexcept { return p == 1.0 ? kInfiniteConjugate : p / (p - 1.0); }
  bool conjugate_infinite() const noexcept { return p == 1.0; }

  /// p_* = pD/(D-p); only meaningful for p < D.
  double critical() const {
    if (p >= D) throw CriticalRegime(p, D);
    return p * D / (D - p);
  }

  /// Hoelder exponent 1 - D/p of the supercritical regime p > D.
  double holder() const {
    if (!(p > D))
      throw ExponentOutOfRange("Hoelder exponent needs p > D (p = " + std::to_string(p) +
                               ", D = " + std::to_string(D) + ")");
    return 1.0 - D / p;
  }
};

inline double effective_dimension(const WeightVector& A) noexcept { return A.D(); }

/// p_* = pD/(D-p) for 1 <= p < D. Throws CriticalRegime for p >= D.
inline double critical_exponent(const WeightVector& A, double p) {
  if (!(p >= 1.0))
    throw ExponentOutOfRange("critical exponent needs p >= 1, got " + std::to_string(p));
  return Exponents{p, A.D()}.critical();
}

}  // namespace monoweight
