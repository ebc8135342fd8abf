#pragma once

// Closed-form constants of the weighted isoperimetric and Sobolev
// inequalities with monomial weight x^A.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "monoweight/errors.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

/// log Gamma(x) for x > 0. std::lgamma is accurate to a few ulp on the
/// positive axis and never overflows in the range used here (D <= 170).
inline double log_gamma(double x) { return std::lgamma(x); }

/// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// log m(B_1^*), m(B_1^*) = prod Gamma((A_i+1)/2) / (2^k Gamma(1 + D/2)).
inline double log_ball_measure(const WeightVector& A) {
  double s = 0.0;
  for (std::size_t i = 0; i < A.n(); ++i) s += log_gamma((A[i] + 1.0) / 2.0);
  return s - static_cast<double>(A.k()) * std::numbers::ln2 - log_gamma(1.0 + A.D() / 2.0);
}

/// Weighted measure of the unit sector ball B_1(0) intersected with R^n_*.
inline double ball_measure(const WeightVector& A) { return std::exp(log_ball_measure(A)); }

/// Weighted perimeter of B_1^*; the flat faces on {x_i = 0} carry zero
/// weight, so P(B_1^*) = D m(B_1^*).
inline double ball_perimeter(const WeightVector& A) { return A.D() * ball_measure(A); }

/// Sharp isoperimetric constant C_1 = P(B_1^*) / m(B_1^*)^{(D-1)/D} = D m(B_1^*)^{1/D}.
inline double isoperimetric_constant(const WeightVector& A) {
  const double D = A.D();
  return D * std::exp(log_ball_measure(A) / D);
}

/// The same constant evaluated directly from the Gamma product with
/// std::tgamma, without the log-space kernel. Used as a second route.
inline double isoperimetric_constant_gamma_product(const WeightVector& A) {
  const double D = A.D();
  double num = 1.0;
  for (std::size_t i = 0; i < A.n(); ++i) num *= std::tgamma((A[i] + 1.0) / 2.0);
  const double den = std::pow(2.0, static_cast<double>(A.k())) * std::tgamma(1.0 + D / 2.0);
  return D * std::pow(num / den, 1.0 / D);
}

namespace detail {

// log of ((p-1)/(D-p))^{1/p'} (p' Gamma(D) / (Gamma(D/p) Gamma(D/p')))^{1/D} D^{-1/p}
inline double log_talenti_core(double m, double p) {
  const double pc = p / (p - 1.0);
  return -std::log(m) / p + std::log((p - 1.0) / (m - p)) / pc +
         (std::log(pc) + log_gamma(m) - log_gamma(m / p) - log_gamma(m / pc)) / m;
}

}  // namespace detail

/// Talenti's one-dimensional sharp ratio
///   J = sup ||u||_{L^q(r^{m-1}dr)} / ||u'||_{L^p(r^{m-1}dr)},  q = mp/(m-p),
/// attained by phi(r) = (a + b r^{p'})^{1-m/p}:
///   J = m^{-1/p} ((p-1)/(m-p))^{1/p'} [ B(m/p, m/p') / p' ]^{-1/m}.
inline double talenti_J(double m, double p) {
  if (!(p > 1.0)) throw ExponentOutOfRange("talenti_J needs p > 1, got " + std::to_string(p));
  if (!(p < m)) throw CriticalRegime(p, m);
  const double pc = p / (p - 1.0);
  const double log_j = -std::log(m) / p + std::log((p - 1.0) / (m - p)) / pc -
                       (log_beta(m / p, m / pc) - std::log(pc)) / m;
  return std::exp(log_j);
}

/// Sharp constant of ||u||_{L^{p_*}(x^A)} <= C_p ||grad u||_{L^p(x^A)} on R^n_*.
///
/// p = 1 is handled explicitly: C_1^{Sob} = 1 / C_1 (isoperimetric constant),
/// not attained. For 1 < p < D radial reduction gives
///   C_p = J(D, p) / P(B_1^*)^{1/D}
///       = C_1^{-1} D^{1-1/D-1/p} ((p-1)/(D-p))^{1/p'}
///         (p' Gamma(D) / (Gamma(D/p) Gamma(D/p')))^{1/D},
/// evaluated in log space so Gamma(D) never overflows.
inline double sobolev_constant(const WeightVector& A, double p) {
  const double D = A.D();
  if (p >= D) throw CriticalRegime(p, D);
  if (!(p >= 1.0))
    throw ExponentOutOfRange("sobolev_constant needs p >= 1, got " + std::to_string(p));
  const double log_c1 = std::log(D) + log_ball_measure(A) / D;
  if (p == 1.0) return std::exp(-log_c1);
  return std::exp(-log_c1 + (1.0 - 1.0 / D) * std::log(D) + detail::log_talenti_core(D, p));
}

/// The literal expression C_1 D^{1/D-1-1/p} ((p-1)/(D-p))^{1/p'} (...)^{1/D}
/// with C_1 the isoperimetric constant. It equals P(B_1^*)^{1/D} J(D,p), i.e.
/// the sharp constant multiplied by P(B_1^*)^{2/D}. Kept so reports can show
/// the difference; it is not a Sobolev constant unless P(B_1^*) = 1.
inline double printed_sobolev_expression(const WeightVector& A, double p) {
  const double D = A.D();
  if (!(p > 1.0) || p >= D) throw ExponentOutOfRange("printed expression needs 1 < p < D");
  const double log_c1 = std::log(D) + log_ball_measure(A) / D;
  return std::exp(log_c1 + (1.0 / D - 1.0) * std::log(D) + detail::log_talenti_core(D, p));
}

/// Constant K b^{-1/D} of the elementary Sobolev proof for functions that are
/// nonincreasing in every coordinate; K = sqrt(n)/min A_i and
/// b = prod 1/(A_i + 1) is the weighted measure of the unit cube.
inline double monotone_sobolev_constant(const WeightVector& A) {
  double min_a = A[0];
  double log_b = 0.0;
  for (std::size_t i = 0; i < A.n(); ++i) {
    if (!(A[i] > 0.0))
      throw InvalidWeight("monotone Sobolev constant needs every A_i > 0 (A_" +
                          std::to_string(i + 1) + " = 0 makes it blow up)");
    min_a = std::min(min_a, A[i]);
    log_b -= std::log(A[i] + 1.0);
  }
  const double K = std::sqrt(static_cast<double>(A.n())) / min_a;
  return K * std::exp(-log_b / A.D());
}

/// C_p / p_*^{1 - 1/D}; stays bounded as p increases to D.
inline double cp_growth_ratio(const WeightVector& A, double p) {
  const double D = A.D();
  if (!(p > 1.0)) throw ExponentOutOfRange("cp_growth_ratio needs p > 1");
  const double ps = critical_exponent(A, p);
  return sobolev_constant(A, p) / std::pow(ps, 1.0 - 1.0 / D);
}

/// Uniform grid of `count` exponents on [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

/// Maximum of cp_growth_ratio over p in [1.1, D - 0.01]; the constant C_0 of
/// C_p <= C_0 p_*^{1-1/D}. Requires D > 1.11.
inline double cp_growth_envelope(const WeightVector& A, std::size_t grid_points = 400) {
  const double D = A.D();
  if (!(D - 0.01 > 1.1))
    throw ExponentOutOfRange("growth envelope needs D > 1.11, got D = " + std::to_string(D));
  double best = 0.0;
  for (double p : linear_grid(1.1, D - 0.01, grid_points)) best = std::max(best, cp_growth_ratio(A, p));
  return best;
}

}  // namespace monoweight
