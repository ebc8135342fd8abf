#pragma once

// Shape families used by the isoperimetric checks: weighted measure,
// perimeter, membership, and volume quadrature.
//
// Containment::orthant means the shape is intersected with R^n_* (families
// centred at the origin) or must already lie in its closure. Containment::
// symmetric means the set itself in R^n with the even weight |x|^A.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/monte_carlo.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

enum class Containment { orthant, symmetric };

struct SectorBall {
  double r = 1.0;
};
struct ShiftedBall {
  double r = 1.0;
  std::vector<double> c;
};
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};
struct EllipsoidSector {
  std::vector<double> semi_axes;
};
/// Planar star domain r < rho(theta) over the angular sector of R^2_*, with
/// rho = sum_j c_j cos(j pi t) and t in [0, 1] the normalised sector angle.
/// rho'(t) vanishes at both ends, so mirrored copies glue to a C^1 curve.
struct Star2D {
  std::vector<double> coeffs;
};

using ShapeKind = std::variant<SectorBall, ShiftedBall, Box, EllipsoidSector, Star2D>;

struct Shape {
  ShapeKind kind;
  Containment containment = Containment::orthant;
};

inline constexpr std::size_t kMaxStarCoefficients = 16;
inline constexpr std::size_t kShapeOrder = 32;

inline const char* kind_name(const Shape& s) {
  switch (s.kind.index()) {
    case 0: return "sector_ball";
    case 1: return "shifted_ball";
    case 2: return "box";
    case 3: return "ellipsoid_sector";
    default: return "star2d";
  }
}

// ---------------------------------------------------------------------------
// Star profiles.

namespace detail {

struct SectorGeometry {
  double theta0;
  double span;
  std::vector<int> quadrants;
};

inline SectorGeometry star_sector(const WeightVector& A) {
  const bool p1 = A.positive(0), p2 = A.positive(1);
  constexpr double h = std::numbers::pi / 2.0;
  if (p1 && p2) return {0.0, h, {0}};
  if (p1) return {-h, 2.0 * h, {-1, 0}};
  if (p2) return {0.0, 2.0 * h, {0, 1}};
  return {0.0, 4.0 * h, {0, 1, 2, 3}};
}

}  // namespace detail

inline double star_profile(const Star2D& s, double t) {
  double v = 0.0;
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) v += s.coeffs[j] * std::cos(static_cast<double>(j) * std::numbers::pi * t);
  return v;
}

inline double star_profile_derivative(const Star2D& s, double t) {
  double v = 0.0;
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    const double w = static_cast<double>(j) * std::numbers::pi;
    v -= s.coeffs[j] * w * std::sin(w * t);
  }
  return v;
}

inline double star_min_profile(const Star2D& s, std::size_t samples = 2049) {
  double mn = star_profile(s, 0.0);
  for (std::size_t i = 1; i < samples; ++i)
    mn = std::min(mn, star_profile(s, static_cast<double>(i) / static_cast<double>(samples - 1)));
  return mn;
}

/// Angular nodes theta in the sector with weights |cos|^{A_1} |sin|^{A_2} dtheta.
inline Rule1D star_angular_rule(const WeightVector& A, std::size_t order) {
  const auto geo = detail::star_sector(A);
  Rule1D out;
  for (int q : geo.quadrants) {
    const bool odd = (q % 2) != 0;
    const Rule1D r = odd ? sine_cosine_rule(order, A[0], A[1]) : sine_cosine_rule(order, A[1], A[0]);
    for (std::size_t i = 0; i < r.size(); ++i) {
      out.nodes.push_back(q * std::numbers::pi / 2.0 + r.nodes[i]);
      out.weights.push_back(r.weights[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation.

inline void validate_shape(const WeightVector& A, const Shape& s) {
  const std::size_t n = A.n();
  const bool orth = s.containment == Containment::orthant;
  auto dim_check = [&](std::size_t m, const char* what) {
    if (m != n) throw InvalidArgument(std::string(what) + " dimension does not match the weight (n = " + std::to_string(n) + ")");
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          if (!(k.r > 0.0)) throw InvalidArgument("sector ball radius must be positive");
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          dim_check(k.c.size(), "ball center");
          if (!(k.r > 0.0)) throw InvalidArgument("ball radius must be positive");
          for (std::size_t i = 0; i < n; ++i) {
            if (!A.positive(i) || k.c[i] == 0.0) continue;
            const double d = orth ? k.c[i] : std::abs(k.c[i]);
            if (d < k.r)
              throw InvalidArgument("ball crosses x_" + std::to_string(i + 1) +
                                    " = 0 off-center; not inside the closure of R^n_*");
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          dim_check(k.lo.size(), "box");
          dim_check(k.hi.size(), "box");
          for (std::size_t i = 0; i < n; ++i) {
            if (!(k.hi[i] > k.lo[i])) throw InvalidArgument("box has empty extent");
            if (orth && A.positive(i) && k.lo[i] < 0.0)
              throw InvalidArgument("box leaves the closure of R^n_* along x_" + std::to_string(i + 1) +
                                    "; use the symmetric containment tag");
          }
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          dim_check(k.semi_axes.size(), "ellipsoid");
          for (double a : k.semi_axes)
            if (!(a > 0.0)) throw InvalidArgument("ellipsoid semi-axes must be positive");
        } else {
          if (n != 2) throw InvalidArgument("star2d shapes need n = 2");
          if (k.coeffs.empty() || k.coeffs.size() > kMaxStarCoefficients)
            throw InvalidArgument("star2d needs 1..16 cosine coefficients");
          if (A.k() == 0)
            for (std::size_t j = 1; j < k.coeffs.size(); j += 2)
              if (k.coeffs[j] != 0.0)
                throw InvalidArgument("star2d over the full plane needs even cosine modes only (periodicity)");
          if (!(star_min_profile(k) > 0.0)) throw InvalidArgument("star2d profile must be strictly positive");
        }
      },
      s.kind);
}

// ---------------------------------------------------------------------------
// Closed forms and quadrature for measure and perimeter.

namespace detail {

inline double symmetric_factor(const WeightVector& A, const Shape& s) {
  return s.containment == Containment::symmetric ? std::pow(2.0, static_cast<double>(A.k())) : 1.0;
}

/// int_lo^hi |x|^a dx.
inline double axis_mass(double a, double lo, double hi) {
  auto F = [a](double x) { return (x < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(x), a + 1.0) / (a + 1.0); };
  return F(hi) - F(lo);
}

inline double face_weight(double a, double v) { return a > 0.0 ? std::pow(std::abs(v), a) : 1.0; }

inline double box_perimeter(const WeightVector& A, const Box& b) {
  const std::size_t n = A.n();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double rest = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) rest *= axis_mass(A[i], b.lo[i], b.hi[i]);
    total += (face_weight(A[j], b.lo[j]) + face_weight(A[j], b.hi[j])) * rest;
  }
  return total;
}

inline double star_measure(const WeightVector& A, const Star2D& s, std::size_t order) {
  const auto geo = star_sector(A);
  const Rule1D r = star_angular_rule(A, order);
  const double D = A.D();
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double rho = star_profile(s, (r.nodes[i] - geo.theta0) / geo.span);
    sum += r.weights[i] * std::pow(rho, D) / D;
  }
  return sum;
}

inline double star_perimeter(const WeightVector& A, const Star2D& s, std::size_t order) {
  const auto geo = star_sector(A);
  const Rule1D r = star_angular_rule(A, order);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = (r.nodes[i] - geo.theta0) / geo.span;
    const double rho = star_profile(s, t);
    const double drho = star_profile_derivative(s, t) / geo.span;
    sum += r.weights[i] * std::pow(rho, A[0] + A[1]) * std::sqrt(rho * rho + drho * drho);
  }
  return sum;
}

inline double ellipsoid_perimeter(const WeightVector& A, const EllipsoidSector& e, std::size_t order) {
  const std::size_t n = A.n();
  std::vector<bool> sing(n);
  for (std::size_t i = 0; i < n; ++i) sing[i] = A.positive(i);
  const QuadratureRule sph = sphere_rule(A, sing, order);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale *= std::pow(e.semi_axes[i], A[i] + 1.0);
  return scale * integrate_weighted(
                     [&](std::span<const double> w) {
                       double s = 0.0;
                       for (std::size_t i = 0; i < n; ++i) s += w[i] * w[i] / (e.semi_axes[i] * e.semi_axes[i]);
                       return std::sqrt(s);
                     },
                     sph);
}

inline bool all_zero(std::span<const double> c) {
  return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

}  // namespace detail

/// m(Omega) = int_Omega x^A dx. Closed forms for sector balls, centred
/// balls, boxes and ellipsoid sectors; quadrature otherwise.
inline double shape_measure(const WeightVector& A, const Shape& s, std::size_t order = kShapeOrder) {
  validate_shape(A, s);
  const double sym = detail::symmetric_factor(A, s);
  const bool whole = s.containment == Containment::symmetric;
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          return sym * std::pow(k.r, A.D()) * ball_measure(A);
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          if (detail::all_zero(k.c)) return sym * std::pow(k.r, A.D()) * ball_measure(A);
          return integrate_weighted([](std::span<const double>) { return 1.0; }, ball_rule(A, k.c, k.r, order, whole));
        } else if constexpr (std::is_same_v<T, Box>) {
          double m = 1.0;
          for (std::size_t i = 0; i < A.n(); ++i) m *= detail::axis_mass(A[i], k.lo[i], k.hi[i]);
          return m;
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          double m = ball_measure(A);
          for (std::size_t i = 0; i < A.n(); ++i) m *= std::pow(k.semi_axes[i], A[i] + 1.0);
          return sym * m;
        } else {
          return sym * detail::star_measure(A, k, order);
        }
      },
      s.kind);
}

/// P(Omega) = int_{boundary} x^A dsigma. Pieces on {x_i = 0} with A_i > 0
/// carry zero weight and are skipped.
inline double shape_perimeter(const WeightVector& A, const Shape& s, std::size_t order = kShapeOrder) {
  validate_shape(A, s);
  const double sym = detail::symmetric_factor(A, s);
  const bool whole = s.containment == Containment::symmetric;
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          return sym * std::pow(k.r, A.D() - 1.0) * ball_perimeter(A);
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          if (detail::all_zero(k.c)) return sym * std::pow(k.r, A.D() - 1.0) * ball_perimeter(A);
          return integrate_weighted([](std::span<const double>) { return 1.0; },
                                    ball_surface_rule(A, k.c, k.r, order, whole));
        } else if constexpr (std::is_same_v<T, Box>) {
          return detail::box_perimeter(A, k);
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          return sym * detail::ellipsoid_perimeter(A, k, order);
        } else {
          return sym * detail::star_perimeter(A, k, order);
        }
      },
      s.kind);
}

// ---------------------------------------------------------------------------
// Geometry: membership, bounding box, diameter, scaling.

inline bool shape_contains(const WeightVector& A, const Shape& s, std::span<const double> x) {
  const std::size_t n = A.n();
  std::vector<double> y(x.begin(), x.end());
  const bool orth = s.containment == Containment::orthant;
  if (orth && !A.in_closed_orthant(y)) return false;
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          double r2 = 0.0;
          for (double v : y) r2 += v * v;
          return r2 < k.r * k.r;
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          double r2 = 0.0;
          for (std::size_t i = 0; i < n; ++i) r2 += (y[i] - k.c[i]) * (y[i] - k.c[i]);
          return r2 < k.r * k.r;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < n; ++i)
            if (y[i] < k.lo[i] || y[i] > k.hi[i]) return false;
          return true;
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          double q = 0.0;
          for (std::size_t i = 0; i < n; ++i) q += y[i] * y[i] / (k.semi_axes[i] * k.semi_axes[i]);
          return q < 1.0;
        } else {
          for (std::size_t i = 0; i < 2; ++i)
            if (A.positive(i)) y[i] = std::abs(y[i]);
          const auto geo = detail::star_sector(A);
          double theta = std::atan2(y[1], y[0]);
          if (A.k() == 0 && theta < 0.0) theta += 2.0 * std::numbers::pi;
          const double t = std::clamp((theta - geo.theta0) / geo.span, 0.0, 1.0);
          return std::hypot(y[0], y[1]) < star_profile(k, t);
        }
      },
      s.kind);
}

struct BoundingBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

inline BoundingBox bounding_box(const WeightVector& A, const Shape& s) {
  const std::size_t n = A.n();
  const bool orth = s.containment == Containment::orthant;
  BoundingBox b{std::vector<double>(n), std::vector<double>(n)};
  auto centred = [&](std::span<const double> half) {
    for (std::size_t i = 0; i < n; ++i) {
      b.hi[i] = half[i];
      b.lo[i] = (orth && A.positive(i)) ? 0.0 : -half[i];
    }
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          centred(std::vector<double>(n, k.r));
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          for (std::size_t i = 0; i < n; ++i) {
            b.lo[i] = k.c[i] - k.r;
            b.hi[i] = k.c[i] + k.r;
            if (orth && A.positive(i)) b.lo[i] = std::max(b.lo[i], 0.0);
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          b.lo = k.lo;
          b.hi = k.hi;
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          centred(k.semi_axes);
        } else {
          double R = 0.0;
          for (double c : k.coeffs) R += std::abs(c);
          centred(std::vector<double>(n, R));
        }
      },
      s.kind);
  return b;
}

/// Diameter: exact for balls and boxes, boundary-sampled (relative accuracy
/// about 1e-4) for ellipsoid sectors and stars.
inline double shape_diameter(const WeightVector& A, const Shape& s) {
  const std::size_t n = A.n();
  const bool orth = s.containment == Containment::orthant;
  auto sampled = [&](const std::vector<std::vector<double>>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        double s2 = 0.0;
        for (std::size_t c = 0; c < n; ++c) s2 += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
        d = std::max(d, std::sqrt(s2));
      }
    return d;
  };
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          if (!orth || A.k() < n) return 2.0 * k.r;
          return n == 1 ? k.r : std::sqrt(2.0) * k.r;
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          return 2.0 * k.r;
        } else if constexpr (std::is_same_v<T, Box>) {
          double s2 = 0.0;
          for (std::size_t i = 0; i < n; ++i) s2 += (k.hi[i] - k.lo[i]) * (k.hi[i] - k.lo[i]);
          return std::sqrt(s2);
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          std::vector<bool> sing(n);
          for (std::size_t i = 0; i < n; ++i) sing[i] = orth && A.positive(i);
          const QuadratureRule sph = sphere_rule(WeightVector::zero(n), sing, n == 1 ? 1 : (n == 2 ? 200 : 24));
          std::vector<std::vector<double>> pts{std::vector<double>(n, 0.0)};
          for (std::size_t q = 0; q < sph.size(); ++q) {
            auto w = sph.node(q);
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = k.semi_axes[i] * w[i];
            pts.push_back(x);
          }
          for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = k.semi_axes[i];
            pts.push_back(e);
            if (!sing[i]) {
              e[i] = -k.semi_axes[i];
              pts.push_back(e);
            }
          }
          return sampled(pts);
        } else {
          const auto geo = detail::star_sector(A);
          std::vector<std::vector<double>> pts{{0.0, 0.0}};
          const int M = 400;
          for (int i = 0; i <= M; ++i) {
            const double t = static_cast<double>(i) / M;
            const double th = geo.theta0 + geo.span * t;
            const double r = star_profile(k, t);
            const double x = r * std::cos(th), y = r * std::sin(th);
            pts.push_back({x, y});
            if (!orth) {
              if (A.positive(0)) pts.push_back({-x, y});
              if (A.positive(1)) pts.push_back({x, -y});
              if (A.positive(0) && A.positive(1)) pts.push_back({-x, -y});
            }
          }
          return sampled(pts);
        }
      },
      s.kind);
}

/// lambda * Omega.
inline Shape scaled_shape(const Shape& s, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("shape scale factor must be positive");
  Shape out = s;
  std::visit(
      [&](auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          k.r *= lambda;
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          k.r *= lambda;
          for (double& c : k.c) c *= lambda;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (double& v : k.lo) v *= lambda;
          for (double& v : k.hi) v *= lambda;
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          for (double& v : k.semi_axes) v *= lambda;
        } else {
          for (double& v : k.coeffs) v *= lambda;
        }
      },
      out.kind);
  return out;
}

// ---------------------------------------------------------------------------
// Volume quadrature over a shape.

namespace detail {

// Mirror every node across {x_i = 0} for each A_i > 0 (symmetric shapes
// built from an orthant rule).
inline QuadratureRule mirror_positive_axes(const WeightVector& A, const QuadratureRule& q) {
  QuadratureRule out;
  out.dim = q.dim;
  out.tag = q.tag;
  out.order = q.order;
  std::vector<std::size_t> axes;
  for (std::size_t i = 0; i < A.n(); ++i)
    if (A.positive(i)) axes.push_back(i);
  std::vector<double> x(q.dim);
  for (std::size_t mask = 0; mask < (std::size_t{1} << axes.size()); ++mask)
    for (std::size_t k = 0; k < q.size(); ++k) {
      auto p = q.node(k);
      std::copy(p.begin(), p.end(), x.begin());
      for (std::size_t b = 0; b < axes.size(); ++b)
        if (mask & (std::size_t{1} << b)) x[axes[b]] = -x[axes[b]];
      out.push(x, q.weights[k]);
    }
  return out;
}

}  // namespace detail

/// Rule with sum w_i f(x_i) ~ int_Omega f x^A dx.
inline QuadratureRule shape_volume_rule(const WeightVector& A, const Shape& s, std::size_t order = kShapeOrder) {
  validate_shape(A, s);
  const std::size_t n = A.n();
  const bool whole = s.containment == Containment::symmetric;
  QuadratureRule orth = std::visit(
      [&](const auto& k) -> QuadratureRule {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) {
          return ball_rule(A, std::vector<double>(n, 0.0), k.r, order, whole);
        } else if constexpr (std::is_same_v<T, ShiftedBall>) {
          return ball_rule(A, k.c, k.r, order, whole);
        } else if constexpr (std::is_same_v<T, Box>) {
          std::vector<std::vector<double>> br(n);
          for (std::size_t i = 0; i < n; ++i) {
            br[i] = {k.lo[i]};
            if (k.lo[i] < 0.0 && k.hi[i] > 0.0) br[i].push_back(0.0);
            br[i].push_back(k.hi[i]);
          }
          return breakpoint_rule(A, br, order);
        } else if constexpr (std::is_same_v<T, EllipsoidSector>) {
          QuadratureRule q = ball_rule(A, std::vector<double>(n, 0.0), 1.0, order, whole);
          double scale = 1.0;
          for (std::size_t i = 0; i < n; ++i) scale *= std::pow(k.semi_axes[i], A[i] + 1.0);
          for (std::size_t j = 0; j < q.size(); ++j)
            for (std::size_t i = 0; i < n; ++i) q.points[j * n + i] *= k.semi_axes[i];
          q.scale_weights(scale);
          return q;
        } else {
          const auto geo = detail::star_sector(A);
          const Rule1D ang = star_angular_rule(A, order);
          const double D = A.D();
          const Rule1D rad = jacobi_on_interval(order, 0.0, 1.0, D - 1.0, 0.0);
          QuadratureRule q;
          q.dim = 2;
          q.tag = DomainTag::region;
          q.order = order;
          for (std::size_t a = 0; a < ang.size(); ++a) {
            const double rho = star_profile(k, (ang.nodes[a] - geo.theta0) / geo.span);
            const double c = std::cos(ang.nodes[a]), sn = std::sin(ang.nodes[a]);
            for (std::size_t b = 0; b < rad.size(); ++b) {
              const double r = rho * rad.nodes[b];
              const double x[2] = {r * c, r * sn};
              q.push(x, ang.weights[a] * rad.weights[b] * std::pow(rho, D));
            }
          }
          if (whole) return detail::mirror_positive_axes(A, q);
          return q;
        }
      },
      s.kind);
  return orth;
}

/// Monte Carlo over a shape: x^A-proportional sampling on its bounding box,
/// rejection outside.
inline MonteCarloEstimate monte_carlo_integrate(const WeightVector& A,
                                                const std::function<double(std::span<const double>)>& f,
                                                const Shape& region, std::size_t samples, std::uint64_t seed) {
  validate_shape(A, region);
  const BoundingBox b = bounding_box(A, region);
  return monte_carlo_integrate(A, f, b.lo, b.hi,
                               [&](std::span<const double> x) { return shape_contains(A, region, x); }, samples,
                               seed);
}

// ---------------------------------------------------------------------------
// JSON: {kind, params, A, n, containment}.

inline nlohmann::json shape_params_json(const Shape& s) {
  return std::visit(
      [](const auto& k) -> nlohmann::json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SectorBall>) return {{"r", k.r}};
        else if constexpr (std::is_same_v<T, ShiftedBall>) return {{"r", k.r}, {"c", k.c}};
        else if constexpr (std::is_same_v<T, Box>) return {{"lo", k.lo}, {"hi", k.hi}};
        else if constexpr (std::is_same_v<T, EllipsoidSector>) return {{"semi_axes", k.semi_axes}};
        else return {{"coeffs", k.coeffs}};
      },
      s.kind);
}

inline nlohmann::json shape_to_json(const WeightVector& A, const Shape& s) {
  nlohmann::json j;
  j["kind"] = kind_name(s);
  j["params"] = shape_params_json(s);
  j["A"] = std::vector<double>(A.exponents().begin(), A.exponents().end());
  j["n"] = A.n();
  j["containment"] = s.containment == Containment::orthant ? "orthant" : "symmetric";
  return j;
}

inline Shape shape_from_json(const nlohmann::json& j) {
  Shape s;
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  if (kind == "sector_ball") s.kind = SectorBall{p.at("r").get<double>()};
  else if (kind == "shifted_ball") s.kind = ShiftedBall{p.at("r").get<double>(), p.at("c").get<std::vector<double>>()};
  else if (kind == "box") s.kind = Box{p.at("lo").get<std::vector<double>>(), p.at("hi").get<std::vector<double>>()};
  else if (kind == "ellipsoid_sector") s.kind = EllipsoidSector{p.at("semi_axes").get<std::vector<double>>()};
  else if (kind == "star2d") s.kind = Star2D{p.at("coeffs").get<std::vector<double>>()};
  else throw InvalidArgument("unknown shape kind '" + kind + "'");
  s.containment = j.value("containment", std::string("orthant")) == "symmetric" ? Containment::symmetric
                                                                                 : Containment::orthant;
  return s;
}

}  // namespace monoweight
