#pragma once

// Radial reduction: for g(|x|),
//   int_{R^n_*} g(|x|) x^A dx = P(B_1^*) int_0^inf r^{D-1} g(r) dr.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

/// Behaviour of g at infinity: either compact support, or a declared
/// algebraic decay |g(r)| = O(r^{-decay}).
struct RadialTail {
  double support = std::numeric_limits<double>::infinity();
  double decay = 0.0;
  std::vector<double> breakpoints;

  static RadialTail compact(double radius, std::vector<double> breaks = {}) {
    return RadialTail{radius, 0.0, std::move(breaks)};
  }
  static RadialTail algebraic(double decay_rate, std::vector<double> breaks = {}) {
    return RadialTail{std::numeric_limits<double>::infinity(), decay_rate, std::move(breaks)};
  }
};

inline constexpr double kRadialTolerance = 1e-11;

/// Adaptive Gauss-Kronrod (15 point) integral of h over [a, b].
inline double adaptive_integral(const std::function<double(double)>& h, double a, double b,
                                double tol = kRadialTolerance, unsigned max_depth = 30) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(h, a, b, max_depth, tol, &err);
  if (!std::isfinite(v)) throw NumericalFailure("radial integrand is not finite");
  return v;
}

/// int_0^inf r^{m-1} g(r) dr. Infinite ranges use the substitution
/// r = s / (1 - s) on [0, 1).
inline double weighted_ray_integral(double m, const std::function<double(double)>& g, const RadialTail& tail,
                                    double tol = kRadialTolerance) {
  std::vector<double> br;
  for (double b : tail.breakpoints)
    if (b > 0.0 && b < tail.support) br.push_back(b);
  std::sort(br.begin(), br.end());
  auto f = [&](double r) { return r > 0.0 ? std::pow(r, m - 1.0) * g(r) : (m == 1.0 ? g(0.0) : 0.0); };
  double total = 0.0;
  if (std::isfinite(tail.support)) {
    double a = 0.0;
    br.push_back(tail.support);
    for (double b : br) {
      total += adaptive_integral(f, a, b, tol);
      a = b;
    }
    return total;
  }
  if (!(tail.decay > m))
    throw NumericalFailure("radial tail diverges: g must decay faster than r^{-" + std::to_string(m) +
                           "} (declared decay r^{-" + std::to_string(tail.decay) + "})");
  auto fs = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double one_minus = 1.0 - s;
    const double r = s / one_minus;
    return f(r) / (one_minus * one_minus);
  };
  double a = 0.0;
  br.push_back(std::numeric_limits<double>::infinity());
  for (double b : br) {
    const double sb = std::isfinite(b) ? b / (1.0 + b) : 1.0;
    total += adaptive_integral(fs, a, sb, tol);
    a = sb;
  }
  return total;
}

/// int_{R^n_*} g(|x|) x^A dx by radial reduction.
inline double radial_integrate(const WeightVector& A, const std::function<double(double)>& g,
                               const RadialTail& tail, double tol = kRadialTolerance) {
  return ball_perimeter(A) * weighted_ray_integral(A.D(), g, tail, tol);
}

}  // namespace monoweight
