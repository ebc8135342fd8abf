#pragma once

// One-dimensional Gauss rules for the monomial weight |x|^a on an interval.
//
// Nodes come from the Golub-Welsch eigen-decomposition of the Jacobi
// (recurrence) matrix. For weights with a closed-form recurrence (Legendre,
// Jacobi) the coefficients are written down directly; for |x|^a on an
// interval away from zero they are produced by the discretized Stieltjes
// procedure on an auxiliary rule that integrates polynomials exactly.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"

namespace monoweight {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

namespace detail {

/// Gauss rule from recurrence coefficients: diag a_0..a_{N-1}, off-diagonal
/// squares b_1..b_{N-1}, zeroth moment mu0.
inline Rule1D golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0) {
  const auto N = static_cast<Eigen::Index>(a.size());
  Rule1D rule;
  if (N == 1) {
    rule.nodes = {a[0]};
    rule.weights = {mu0};
    return rule;
  }
  Eigen::VectorXd diag(N), sub(N - 1);
  for (Eigen::Index i = 0; i < N; ++i) diag[i] = a[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < N; ++i) sub[i] = std::sqrt(b[static_cast<std::size_t>(i)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalFailure("Golub-Welsch eigen-solve failed");
  rule.nodes.resize(static_cast<std::size_t>(N));
  rule.weights.resize(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

/// Discretized Stieltjes procedure: recurrence coefficients of the discrete
/// measure sum_j w_j delta(x - x_j), exact for the continuous measure as long
/// as the discrete one integrates polynomials of degree <= 2N - 1 exactly.
/// Signed discrete weights are allowed; only inner products are used.
inline Rule1D stieltjes_gauss(const std::vector<double>& x, const std::vector<double>& w, std::size_t N) {
  const std::size_t M = x.size();
  std::vector<double> p_prev(M, 0.0), p(M, 1.0), p_next(M);
  std::vector<double> a(N), b(N > 0 ? N - 1 : 0);
  double norm_prev = 0.0;
  double mu0 = 0.0;
  for (std::size_t j = 0; j < M; ++j) mu0 += w[j];
  double norm = mu0;
  for (std::size_t k = 0; k < N; ++k) {
    double num = 0.0;
    for (std::size_t j = 0; j < M; ++j) num += w[j] * x[j] * p[j] * p[j];
    if (!(norm > 0.0)) throw NumericalFailure("Stieltjes procedure lost positivity at degree " + std::to_string(k));
    a[k] = num / norm;
    const double bk = k == 0 ? 0.0 : norm / norm_prev;
    if (k > 0) b[k - 1] = bk;
    if (k + 1 == N) break;
    double next_norm = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      p_next[j] = (x[j] - a[k]) * p[j] - bk * p_prev[j];
      next_norm += w[j] * p_next[j] * p_next[j];
    }
    std::swap(p_prev, p);
    std::swap(p, p_next);
    norm_prev = norm;
    norm = next_norm;
  }
  return golub_welsch(a, b, mu0);
}

}  // namespace detail

/// Gauss-Jacobi rule for the weight (1 - x)^alpha (1 + x)^beta on [-1, 1],
/// alpha, beta > -1. Exact for polynomials of degree <= 2 order - 1.
inline Rule1D gauss_jacobi(std::size_t order, double alpha, double beta) {
  if (order < 1) throw InvalidArgument("Gauss rule needs order >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw InvalidArgument("Jacobi exponents must exceed -1");
  const double ab = alpha + beta;
  std::vector<double> a(order), b(order - 1);
  a[0] = (beta - alpha) / (ab + 2.0);
  for (std::size_t k = 1; k < order; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  for (std::size_t k = 1; k < order; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    if (k == 1) {
      // (k + alpha + beta) cancels against (s - 1) at k = 1.
      b[0] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b[k - 1] = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
  }
  const double log_mu0 = (ab + 1.0) * std::numbers::ln2 + log_gamma(alpha + 1.0) +
                         log_gamma(beta + 1.0) - log_gamma(ab + 2.0);
  return detail::golub_welsch(a, b, std::exp(log_mu0));
}

inline Rule1D gauss_legendre(std::size_t order) { return gauss_jacobi(order, 0.0, 0.0); }

/// Rule for the weight (t - lo)^left (hi - t)^right on [lo, hi].
inline Rule1D jacobi_on_interval(std::size_t order, double lo, double hi, double left, double right) {
  Rule1D ref = gauss_jacobi(order, right, left);
  const double half = 0.5 * (hi - lo);
  const double scale = std::pow(half, left + right + 1.0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref.nodes[i] = lo + half * (1.0 + ref.nodes[i]);
    ref.weights[i] *= scale;
  }
  return ref;
}

/// Gauss rule for |x|^a on [lo, hi]: sum w_i f(x_i) = int_lo^hi |x|^a f(x) dx
/// exactly for polynomials f of degree <= 2 order - 1.
inline Rule1D monomial_weight_rule(std::size_t order, double a, double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("empty interval in quadrature rule");
  if (order < 1) throw InvalidArgument("Gauss rule needs order >= 1");
  if (a == 0.0) return jacobi_on_interval(order, lo, hi, 0.0, 0.0);
  if (lo == 0.0) return jacobi_on_interval(order, lo, hi, a, 0.0);
  if (hi == 0.0) return jacobi_on_interval(order, lo, hi, 0.0, a);

  // General interval. Work in xi in [-1, 1] so monic recurrences stay O(1).
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const std::size_t aux = order + 2;
  std::vector<double> xs, ws;
  auto append = [&](const Rule1D& r, double sign) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      xs.push_back((r.nodes[i] - mid) / half);
      ws.push_back(sign * r.weights[i]);
    }
  };
  if (lo < 0.0 && hi > 0.0) {
    append(jacobi_on_interval(aux, lo, 0.0, 0.0, a), 1.0);
    append(jacobi_on_interval(aux, 0.0, hi, a, 0.0), 1.0);
  } else {
    const double near = std::min(std::abs(lo), std::abs(hi));
    const double far = std::max(std::abs(lo), std::abs(hi));
    const double sgn = hi > 0.0 ? 1.0 : -1.0;
    if (near / far < 0.25) {
      // int_near^far = int_0^far - int_0^near, both exact Jacobi rules.
      Rule1D outer = jacobi_on_interval(aux, 0.0, far, a, 0.0);
      Rule1D inner = jacobi_on_interval(aux, 0.0, near, a, 0.0);
      for (auto* r : {&outer, &inner})
        for (double& t : r->nodes) t *= sgn;
      append(outer, 1.0);
      append(inner, -1.0);
    } else {
      // |x|^a is analytic on the interval: Gauss-Legendre with many nodes
      // integrates |x|^a * poly to machine precision.
      Rule1D gl = jacobi_on_interval(2 * order + 48, lo, hi, 0.0, 0.0);
      for (std::size_t i = 0; i < gl.size(); ++i) gl.weights[i] *= std::pow(std::abs(gl.nodes[i]), a);
      append(gl, 1.0);
    }
  }
  Rule1D r = detail::stieltjes_gauss(xs, ws, order);
  for (std::size_t i = 0; i < r.size(); ++i) r.nodes[i] = mid + half * r.nodes[i];
  return r;
}

/// Composite rule for |x|^a over consecutive panels [breaks[j], breaks[j+1]].
inline Rule1D composite_monomial_rule(std::size_t order, double a, const std::vector<double>& breaks) {
  if (breaks.size() < 2) throw InvalidArgument("composite rule needs at least one panel");
  Rule1D out;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    // A panel straddling zero is split so the kink of |x|^a sits on a break.
    const double lo = breaks[j], hi = breaks[j + 1];
    std::vector<std::pair<double, double>> pieces;
    if (a > 0.0 && lo < 0.0 && hi > 0.0)
      pieces = {{lo, 0.0}, {0.0, hi}};
    else
      pieces = {{lo, hi}};
    for (auto [l, h] : pieces) {
      Rule1D r = monomial_weight_rule(order, a, l, h);
      out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
      out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
  }
  return out;
}

/// Uniform breakpoints lo, lo + h, ..., hi.
inline std::vector<double> uniform_breaks(double lo, double hi, std::size_t panels) {
  std::vector<double> b(panels + 1);
  for (std::size_t j = 0; j <= panels; ++j)
    b[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(panels);
  b.back() = hi;
  return b;
}

/// Breakpoints 0, h, h q, h q^2, ... up to hi: panels grow geometrically
/// away from the origin, resolving functions with polynomial tails.
inline std::vector<double> graded_breaks(double hi, double first, double ratio) {
  std::vector<double> b{0.0};
  for (double x = first; x < hi / std::sqrt(ratio); x *= ratio) b.push_back(x);
  b.push_back(hi);
  return b;
}

/// 1-D rule for sin^s(phi) cos^c(phi) on [0, pi/2]. The endpoint behaviour
/// phi^s (pi/2 - phi)^c is absorbed by a Gauss-Jacobi rule; the remaining
/// factor (sin phi / phi)^s (cos phi / (pi/2 - phi))^c is analytic.
inline Rule1D sine_cosine_rule(std::size_t order, double s, double c) {
  constexpr double h = std::numbers::pi / 2.0;
  Rule1D r = jacobi_on_interval(order, 0.0, h, s, c);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r.nodes[i];
    double f = 1.0;
    if (s != 0.0) f *= std::pow(std::sin(t) / t, s);
    if (c != 0.0) f *= std::pow(std::cos(t) / (h - t), c);
    r.weights[i] *= f;
  }
  return r;
}

}  // namespace monoweight
