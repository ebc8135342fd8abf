#pragma once

// Multi-dimensional quadrature rules whose weights already contain x^A.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/test_function.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

enum class DomainTag { box, radial_ray, boundary_patch, region };

inline const char* to_string(DomainTag t) {
  switch (t) {
    case DomainTag::box: return "box";
    case DomainTag::radial_ray: return "radial_ray";
    case DomainTag::boundary_patch: return "boundary_patch";
    case DomainTag::region: return "region";
  }
  return "?";
}

/// Nodes (flattened, `dim` coordinates each) and positive weights that
/// already include the factor x^A.
struct QuadratureRule {
  std::size_t dim = 0;
  std::vector<double> points;
  std::vector<double> weights;
  DomainTag tag = DomainTag::box;
  std::size_t order = 0;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> node(std::size_t i) const noexcept { return {points.data() + i * dim, dim}; }

  void push(std::span<const double> x, double w) {
    points.insert(points.end(), x.begin(), x.end());
    weights.push_back(w);
  }

  void append(const QuadratureRule& other) {
    if (dim == 0) dim = other.dim;
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }

  void scale_weights(double s) {
    for (double& w : weights) w *= s;
  }
};

/// Pairwise (cascade) summation; result independent of how callers chunk work.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

/// sum_i w_i f(x_i). A non-finite integrand value is a hard error.
template <class F>
double integrate_weighted(F&& f, const QuadratureRule& rule) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = f(rule.node(i));
    if (!std::isfinite(v))
      throw NumericalFailure("integrand is not finite at node " + format_point(rule.node(i)));
    terms[i] = rule.weights[i] * v;
  }
  return pairwise_sum(terms);
}

inline double integrate_weighted(const TestFunction& f, const QuadratureRule& rule) {
  return integrate_weighted([&](std::span<const double> x) { return f.value(x); }, rule);
}

inline constexpr std::size_t kDefaultOrder = 24;

struct ConvergedIntegral {
  double value = 0.0;
  std::size_t order = 0;
  /// |I(order) - I(order / 2)| of the last comparison.
  double difference = 0.0;
};

/// Integrates with rules from `make_rule(order)`, doubling the order until
/// two consecutive values agree to `rel_tol` (relative, absolute below 1).
template <class F, class Factory>
ConvergedIntegral refine_until_converged(F&& f, Factory&& make_rule, double rel_tol,
                                         std::size_t order = kDefaultOrder, std::size_t max_order = 384) {
  double prev = integrate_weighted(f, make_rule(order));
  for (std::size_t q = 2 * order; q <= max_order; q *= 2) {
    const double cur = integrate_weighted(f, make_rule(q));
    const double diff = std::abs(cur - prev);
    if (diff <= rel_tol * std::max(1.0, std::abs(cur))) return {cur, q, diff};
    prev = cur;
  }
  throw NumericalFailure("quadrature did not self-converge to " + std::to_string(rel_tol) + " by order " +
                         std::to_string(max_order));
}

/// Tensor product of one-dimensional rules (weights multiply).
inline QuadratureRule tensor_rule(const std::vector<Rule1D>& axes, DomainTag tag, std::size_t order) {
  QuadratureRule q;
  q.dim = axes.size();
  q.tag = tag;
  q.order = order;
  std::size_t total = 1;
  for (const auto& r : axes) total *= r.size();
  q.points.reserve(total * q.dim);
  q.weights.reserve(total);
  std::vector<std::size_t> idx(q.dim, 0);
  std::vector<double> x(q.dim);
  for (std::size_t count = 0; count < total; ++count) {
    double w = 1.0;
    for (std::size_t d = 0; d < q.dim; ++d) {
      x[d] = axes[d].nodes[idx[d]];
      w *= axes[d].weights[idx[d]];
    }
    q.push(x, w);
    for (std::size_t d = q.dim; d-- > 0;) {
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }
  return q;
}

namespace detail {
inline void check_box(const WeightVector& A, std::span<const double> lo, std::span<const double> hi) {
  if (lo.size() != A.n() || hi.size() != A.n()) throw InvalidArgument("box dimension does not match weight");
  for (std::size_t i = 0; i < A.n(); ++i) {
    if (!(hi[i] > lo[i])) throw InvalidArgument("box has empty extent along axis " + std::to_string(i + 1));
    if (A.positive(i) && lo[i] < 0.0)
      throw InvalidArgument("box crosses the hyperplane x_" + std::to_string(i + 1) +
                            " = 0 where A_" + std::to_string(i + 1) + " > 0");
  }
}
}  // namespace detail

/// Tensor Gauss rule for x^A on an axis-aligned box inside the closed
/// orthant; exact for polynomials of degree <= 2 order - 1 per axis.
inline QuadratureRule box_rule(const WeightVector& A, std::span<const double> lo, std::span<const double> hi,
                               std::size_t order) {
  detail::check_box(A, lo, hi);
  std::vector<Rule1D> axes;
  for (std::size_t i = 0; i < A.n(); ++i) axes.push_back(monomial_weight_rule(order, A[i], lo[i], hi[i]));
  return tensor_rule(axes, DomainTag::box, order);
}

/// Composite tensor rule with `panels` equal panels per axis.
inline QuadratureRule composite_box_rule(const WeightVector& A, std::span<const double> lo,
                                         std::span<const double> hi, std::size_t order, std::size_t panels) {
  detail::check_box(A, lo, hi);
  std::vector<Rule1D> axes;
  for (std::size_t i = 0; i < A.n(); ++i)
    axes.push_back(composite_monomial_rule(order, A[i], uniform_breaks(lo[i], hi[i], panels)));
  return tensor_rule(axes, DomainTag::box, order);
}

/// Composite tensor rule with explicit breakpoints per axis. Breaks may
/// straddle zero: the weight is |x_i|^{A_i} there (whole-space integration).
inline QuadratureRule breakpoint_rule(const WeightVector& A, const std::vector<std::vector<double>>& breaks,
                                      std::size_t order) {
  if (breaks.size() != A.n()) throw InvalidArgument("breakpoint list does not match weight dimension");
  std::vector<Rule1D> axes;
  for (std::size_t i = 0; i < A.n(); ++i) axes.push_back(composite_monomial_rule(order, A[i], breaks[i]));
  return tensor_rule(axes, DomainTag::box, order);
}

/// Rule over the part of the unit sphere with omega_i >= 0 for every i in
/// `singular` (the other coordinates take both signs). Weights are
/// prod_{i in singular} omega_i^{A_i} dsigma.
///
/// Hyperspherical angles phi_1..phi_{n-1} in [0, pi/2] on each orthant; the
/// measure factorises into sin^s cos^c per angle.
inline QuadratureRule sphere_rule(const WeightVector& A, const std::vector<bool>& singular, std::size_t order) {
  const std::size_t n = A.n();
  QuadratureRule q;
  q.dim = n;
  q.tag = DomainTag::boundary_patch;
  q.order = order;
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i] = singular[i] ? A[i] : 0.0;

  QuadratureRule orth;
  orth.dim = n;
  if (n == 1) {
    std::vector<double> one{1.0};
    orth.push(one, 1.0);
  } else {
    std::vector<Rule1D> angles;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      double s = 0.0, c = e[j];
      if (j + 2 < n) {
        s = static_cast<double>(n - 2 - j);
        for (std::size_t i = j + 1; i < n; ++i) s += e[i];
      } else {
        s = e[n - 1];
      }
      angles.push_back(sine_cosine_rule(order, s, c));
    }
    QuadratureRule ang = tensor_rule(angles, DomainTag::boundary_patch, order);
    std::vector<double> w(n);
    for (std::size_t k = 0; k < ang.size(); ++k) {
      auto phi = ang.node(k);
      double sprod = 1.0;
      for (std::size_t j = 0; j + 1 < n; ++j) {
        w[j] = sprod * std::cos(phi[j]);
        sprod *= std::sin(phi[j]);
      }
      w[n - 1] = sprod;
      orth.push(w, ang.weights[k]);
    }
  }
  // Sign flips of the non-singular coordinates.
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < n; ++i)
    if (!singular[i]) free_axes.push_back(i);
  const std::size_t flips = std::size_t{1} << free_axes.size();
  std::vector<double> x(n);
  for (std::size_t mask = 0; mask < flips; ++mask) {
    for (std::size_t k = 0; k < orth.size(); ++k) {
      auto w = orth.node(k);
      std::copy(w.begin(), w.end(), x.begin());
      for (std::size_t b = 0; b < free_axes.size(); ++b)
        if (mask & (std::size_t{1} << b)) x[free_axes[b]] = -x[free_axes[b]];
      q.push(x, orth.weights[k]);
    }
  }
  return q;
}

namespace detail {

// Coordinates whose weight is singular at the center of a ball: A_i > 0 and
// c_i == 0. Every other positive-exponent coordinate must keep the whole ball
// on one side of {x_i = 0} (orthant mode: c_i >= r).
inline std::vector<bool> ball_singular_axes(const WeightVector& A, std::span<const double> c, double r,
                                            bool whole_space) {
  std::vector<bool> s(A.n(), false);
  for (std::size_t i = 0; i < A.n(); ++i) {
    if (!A.positive(i)) continue;
    if (c[i] == 0.0) {
      s[i] = true;
    } else if (whole_space ? std::abs(c[i]) < r : c[i] < r) {
      throw InvalidArgument("ball B(c, r) crosses x_" + std::to_string(i + 1) +
                            " = 0 off-center; only centered or fully one-sided balls are supported");
    }
  }
  return s;
}

}  // namespace detail

/// Volume rule for the ball B(c, r) intersected with R^n_* (orthant mode),
/// or the whole ball with the even weight |x|^A (whole_space mode).
inline QuadratureRule ball_rule(const WeightVector& A, std::span<const double> c, double r, std::size_t order,
                                bool whole_space = false) {
  if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
  const std::size_t n = A.n();
  const auto sing = detail::ball_singular_axes(A, c, r, whole_space);
  double radial_exp = static_cast<double>(n) - 1.0;
  for (std::size_t i = 0; i < n; ++i)
    if (sing[i]) radial_exp += A[i];
  const Rule1D rad = jacobi_on_interval(order, 0.0, r, radial_exp, 0.0);
  const QuadratureRule sph = sphere_rule(A, sing, order);
  QuadratureRule q;
  q.dim = n;
  q.tag = DomainTag::region;
  q.order = order;
  std::vector<double> x(n);
  const std::size_t mirrors = whole_space ? (std::size_t{1} << n) : 1;
  for (std::size_t m = 0; m < mirrors; ++m) {
    // In whole-space mode mirror the singular coordinates across x_i = 0.
    bool skip = false;
    for (std::size_t i = 0; i < n; ++i)
      if ((m >> i) & 1U) skip = skip || !sing[i];
    if (skip) continue;
    for (std::size_t a = 0; a < rad.size(); ++a) {
      for (std::size_t b = 0; b < sph.size(); ++b) {
        auto w = sph.node(b);
        double wt = rad.weights[a] * sph.weights[b];
        for (std::size_t i = 0; i < n; ++i) {
          const double off = rad.nodes[a] * w[i];
          x[i] = ((m >> i) & 1U) ? -(c[i] + off) : c[i] + off;
          if (!sing[i] && A.positive(i)) wt *= std::pow(std::abs(x[i]), A[i]);
        }
        q.push(x, wt);
      }
    }
  }
  return q;
}

/// Surface rule for the sphere part of the boundary of ball_rule's region.
/// Flat pieces on {x_i = 0} carry zero weight and are omitted.
inline QuadratureRule ball_surface_rule(const WeightVector& A, std::span<const double> c, double r,
                                        std::size_t order, bool whole_space = false) {
  const std::size_t n = A.n();
  const auto sing = detail::ball_singular_axes(A, c, r, whole_space);
  double scale = std::pow(r, static_cast<double>(n) - 1.0);
  for (std::size_t i = 0; i < n; ++i)
    if (sing[i]) scale *= std::pow(r, A[i]);
  const QuadratureRule sph = sphere_rule(A, sing, order);
  QuadratureRule q;
  q.dim = n;
  q.tag = DomainTag::boundary_patch;
  q.order = order;
  std::vector<double> x(n);
  const std::size_t mirrors = whole_space ? (std::size_t{1} << n) : 1;
  for (std::size_t m = 0; m < mirrors; ++m) {
    bool skip = false;
    for (std::size_t i = 0; i < n; ++i)
      if ((m >> i) & 1U) skip = skip || !sing[i];
    if (skip) continue;
    for (std::size_t b = 0; b < sph.size(); ++b) {
      auto w = sph.node(b);
      double wt = scale * sph.weights[b];
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = ((m >> i) & 1U) ? -(c[i] + r * w[i]) : c[i] + r * w[i];
        if (!sing[i] && A.positive(i)) wt *= std::pow(std::abs(x[i]), A[i]);
      }
      q.push(x, wt);
    }
  }
  return q;
}

/// Sector ball B_r^* = B_r(0) intersected with R^n_*.
inline QuadratureRule sector_ball_rule(const WeightVector& A, double r, std::size_t order) {
  std::vector<double> c(A.n(), 0.0);
  return ball_rule(A, c, r, order);
}

/// Composite tensor rule over the bounding box of supp u intersected with
/// the closed orthant. Empty when the support misses R^n_*.
inline QuadratureRule support_rule(const WeightVector& A, const TestFunction& u, std::size_t order,
                                   std::size_t panels) {
  if (u.dim != A.n()) throw InvalidArgument("test function dimension does not match weight");
  std::vector<double> lo(A.n()), hi(A.n());
  for (std::size_t i = 0; i < A.n(); ++i) {
    lo[i] = u.center[i] - u.support_radius;
    hi[i] = u.center[i] + u.support_radius;
    if (A.positive(i)) {
      lo[i] = std::max(lo[i], 0.0);
      if (hi[i] <= 0.0) return QuadratureRule{A.n(), {}, {}, DomainTag::box, order};
    }
  }
  return composite_box_rule(A, lo, hi, order, panels);
}

}  // namespace monoweight
