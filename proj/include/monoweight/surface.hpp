#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/test_function.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

/// C^1 parametrisation X: [lo, hi] subset R^{n-1} -> boundary piece in R^n.
///
/// `endpoint_exponents[j] = {l, r}` declares that the integrand
/// x^A * |metric| vanishes like (t_j - lo_j)^l at the low end and
/// (hi_j - t_j)^r at the high end; those factors are absorbed into a
/// Gauss-Jacobi rule so the remaining integrand is smooth.
struct BoundaryPatch {
  std::vector<double> lo;
  std::vector<double> hi;
  std::function<std::vector<double>(std::span<const double>)> map;
  std::vector<std::pair<double, double>> endpoint_exponents;

  std::size_t param_dim() const noexcept { return lo.size(); }
};

inline constexpr double kDegenerateMetric = 1e-12;

/// Quadrature rule on a boundary patch; weights include x^A and the surface
/// element sqrt(det(J^T J)).
inline QuadratureRule patch_rule(const WeightVector& A, const BoundaryPatch& patch, std::size_t order) {
  const std::size_t n = A.n();
  const std::size_t m = patch.param_dim();
  if (m + 1 != n) throw InvalidArgument("boundary patch must have n - 1 parameters");
  QuadratureRule q;
  q.dim = n;
  q.tag = DomainTag::boundary_patch;
  q.order = order;
  if (m == 0) {
    const auto x = patch.map({});
    q.push(x, A.weight(x));
    return q;
  }
  std::vector<Rule1D> axes;
  for (std::size_t j = 0; j < m; ++j) {
    const auto [l, r] = j < patch.endpoint_exponents.size() ? patch.endpoint_exponents[j] : std::pair{0.0, 0.0};
    axes.push_back(jacobi_on_interval(order, patch.lo[j], patch.hi[j], l, r));
  }
  const QuadratureRule params = tensor_rule(axes, DomainTag::boundary_patch, order);
  Eigen::MatrixXd J(n, m);
  std::vector<double> t(m);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto tk = params.node(k);
    std::copy(tk.begin(), tk.end(), t.begin());
    const auto x = patch.map(t);
    double tn = 0.0;
    for (double v : t) tn += v * v;
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::sqrt(tn));
    for (std::size_t j = 0; j < m; ++j) {
      t[j] = tk[j] + h;
      const auto xp = patch.map(t);
      t[j] = tk[j] - h;
      const auto xm = patch.map(t);
      t[j] = tk[j];
      for (std::size_t i = 0; i < n; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (xp[i] - xm[i]) / (2.0 * h);
    }
    const double det = (J.transpose() * J).determinant();
    if (!(det > kDegenerateMetric * kDegenerateMetric))
      throw NumericalFailure("degenerate boundary parametrisation at parameter " + format_point(tk));
    double absorbed = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto [l, r] = j < patch.endpoint_exponents.size() ? patch.endpoint_exponents[j] : std::pair{0.0, 0.0};
      if (l != 0.0) absorbed *= std::pow(tk[j] - patch.lo[j], l);
      if (r != 0.0) absorbed *= std::pow(patch.hi[j] - tk[j], r);
    }
    q.push(x, params.weights[k] * A.weight(x) * std::sqrt(det) / absorbed);
  }
  return q;
}

/// int_patch f x^A dsigma.
inline double surface_integrate(const WeightVector& A, const BoundaryPatch& patch, const TestFunction& f,
                                std::size_t order = 24) {
  return integrate_weighted(f, patch_rule(A, patch, order));
}

template <class F>
double surface_integrate(const WeightVector& A, const BoundaryPatch& patch, F&& f, std::size_t order = 24) {
  return integrate_weighted(std::forward<F>(f), patch_rule(A, patch, order));
}

/// Sphere piece |x - c| = r with x_i - c_i >= 0 on every axis, in
/// hyperspherical angles. Declares the endpoint exponents of the weight
/// (x - c)^A for a centred sphere (c = 0).
inline BoundaryPatch sphere_orthant_patch(const WeightVector& A, std::vector<double> c, double r) {
  const std::size_t n = A.n();
  BoundaryPatch p;
  p.lo.assign(n - 1, 0.0);
  p.hi.assign(n - 1, std::numbers::pi / 2.0);
  p.map = [c, r, n](std::span<const double> phi) {
    std::vector<double> x(n);
    double s = 1.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      x[j] = c[j] + r * s * std::cos(phi[j]);
      s *= std::sin(phi[j]);
    }
    x[n - 1] = c[n - 1] + r * s;
    return x;
  };
  bool centred = true;
  for (double v : c) centred = centred && v == 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double low = 0.0, high = 0.0;
    if (j + 2 < n) {
      low = static_cast<double>(n - 2 - j);
      if (centred)
        for (std::size_t i = j + 1; i < n; ++i) low += A[i];
      high = centred ? A[j] : 0.0;
    } else {
      low = centred ? A[n - 1] : 0.0;
      high = centred ? A[n - 2] : 0.0;
    }
    p.endpoint_exponents.emplace_back(low, high);
  }
  return p;
}

/// Face {x_axis = (side ? hi : lo)[axis]} of the box [lo, hi].
inline BoundaryPatch box_face_patch(std::vector<double> lo, std::vector<double> hi, std::size_t axis, bool high_side,
                                    const WeightVector& A) {
  const std::size_t n = lo.size();
  BoundaryPatch p;
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < n; ++i)
    if (i != axis) {
      free_axes.push_back(i);
      p.lo.push_back(lo[i]);
      p.hi.push_back(hi[i]);
      const bool at_zero = A.positive(i) && lo[i] == 0.0;
      p.endpoint_exponents.emplace_back(at_zero ? A[i] : 0.0, 0.0);
    }
  const double fixed = high_side ? hi[axis] : lo[axis];
  p.map = [free_axes, axis, fixed, n](std::span<const double> t) {
    std::vector<double> x(n);
    x[axis] = fixed;
    for (std::size_t j = 0; j < free_axes.size(); ++j) x[free_axes[j]] = t[j];
    return x;
  };
  return p;
}

}  // namespace monoweight
