#pragma once

// Weighted Neumann problem div(x^A grad u) = b x^A in a planar domain with
// closure inside R^2_*, u_nu = 1 on the boundary.
//
// Cut-cell finite volumes on a uniform grid. The boundary is the polygon
// through the exact crossings of the level set with the grid lines; each
// cell keeps the part of its square inside that polygon. Fluxes through
// cell faces use the exact weighted length of the open part of the face
// (its aperture), the Neumann data enter as the weighted length of the
// boundary chords. Summing the cell equations leaves b = P_h / m_h.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/inequalities.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

using Point2 = std::array<double, 2>;

/// Distance every domain keeps from both axes.
inline constexpr double kAxisMargin = 0.1;

/// Relative face length below which a face counts as closed.
inline constexpr double kSliver = 1e-9;

// ---------------------------------------------------------------------------
// Smooth test domains. Each has a level function (negative inside) and a
// chart (theta, s) -> x with s in [0, 1], used for the reference values of
// m and P that the grid never sees.

/// Rotated ellipse.
struct EllipseDomain {
  Point2 center;
  double a = 1.0;
  double b = 1.0;
  double angle = 0.0;
};

/// {((r - r0)/hr)^4 + ((theta - t0)/ht)^4 < 1} in polar coordinates: an
/// annular sector with rounded corners.
struct RoundedSectorDomain {
  double r0 = 1.5;
  double hr = 0.5;
  double t0 = std::numbers::pi / 4.0;
  double ht = 0.55;
};

using PlanarDomain = std::variant<EllipseDomain, RoundedSectorDomain>;

inline EllipseDomain disk_domain(Point2 c, double r) { return EllipseDomain{c, r, r, 0.0}; }

inline double level_value(const PlanarDomain& d, Point2 x) {
  if (const auto* e = std::get_if<EllipseDomain>(&d)) {
    const double dx = x[0] - e->center[0], dy = x[1] - e->center[1];
    const double c = std::cos(e->angle), s = std::sin(e->angle);
    const double u = (c * dx + s * dy) / e->a, v = (-s * dx + c * dy) / e->b;
    return u * u + v * v - 1.0;
  }
  const auto& q = std::get<RoundedSectorDomain>(d);
  const double s = (std::hypot(x[0], x[1]) - q.r0) / q.hr, t = (std::atan2(x[1], x[0]) - q.t0) / q.ht;
  return s * s * s * s + t * t * t * t - 1.0;
}

inline std::string domain_name(const PlanarDomain& d) {
  std::ostringstream os;
  if (const auto* e = std::get_if<EllipseDomain>(&d)) {
    os << (e->a == e->b ? "disk" : "ellipse") << "(c=" << e->center[0] << "," << e->center[1] << ";a=" << e->a
       << ";b=" << e->b << ";angle=" << e->angle << ")";
  } else {
    const auto& q = std::get<RoundedSectorDomain>(d);
    os << "rounded_sector(r0=" << q.r0 << ";hr=" << q.hr << ";t0=" << q.t0 << ";ht=" << q.ht << ")";
  }
  return os.str();
}

namespace detail {

struct ChartPoint {
  Point2 x;
  double area_element;  // |det d(x)/d(theta, s)|
  double arc_element;   // |d x / d theta| at s = 1
};

inline ChartPoint chart(const PlanarDomain& d, double th, double s) {
  const double ct = std::cos(th), st = std::sin(th);
  if (const auto* e = std::get_if<EllipseDomain>(&d)) {
    const double c = std::cos(e->angle), sn = std::sin(e->angle);
    const double u = e->a * s * ct, v = e->b * s * st;
    const double du = -e->a * st, dv = e->b * ct;
    return {{e->center[0] + c * u - sn * v, e->center[1] + sn * u + c * v}, e->a * e->b * s, std::hypot(du, dv)};
  }
  const auto& q = std::get<RoundedSectorDomain>(d);
  const double c4 = ct * ct * ct * ct + st * st * st * st;
  const double sigma = std::pow(c4, -0.25);
  const double dsigma = (ct * ct * ct * st - st * st * st * ct) * std::pow(c4, -1.25);
  const double r = q.r0 + q.hr * sigma * s * ct, t = q.t0 + q.ht * sigma * s * st;
  const double dr = q.hr * (dsigma * ct - sigma * st), dt = q.ht * (dsigma * st + sigma * ct);
  return {{r * std::cos(t), r * std::sin(t)}, q.hr * q.ht * sigma * sigma * s * r, std::hypot(dr, r * dt)};
}

}  // namespace detail

/// m(Omega) and P(Omega) from the chart: periodic trapezoid in theta, Gauss
/// in s.
struct ReferenceValues {
  double measure = 0.0;
  double perimeter = 0.0;
};

inline ReferenceValues reference_values(const WeightVector& A, const PlanarDomain& d, std::size_t angles = 2048,
                                        std::size_t order = 24) {
  if (A.n() != 2) throw InvalidArgument("planar domains need a weight with n = 2");
  const Rule1D gs = jacobi_on_interval(order, 0.0, 1.0, 0.0, 0.0);
  const double dth = 2.0 * std::numbers::pi / static_cast<double>(angles);
  std::vector<double> m, p;
  for (std::size_t k = 0; k < angles; ++k) {
    const double th = dth * static_cast<double>(k);
    const auto edge = detail::chart(d, th, 1.0);
    p.push_back(dth * A.weight(edge.x) * edge.arc_element);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      const auto c = detail::chart(d, th, gs.nodes[j]);
      m.push_back(dth * gs.weights[j] * A.weight(c.x) * c.area_element);
    }
  }
  return {pairwise_sum(m), pairwise_sum(p)};
}

/// Axis-aligned box containing the domain.
inline std::array<double, 4> domain_bbox(const PlanarDomain& d, std::size_t samples = 4096) {
  std::array<double, 4> b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < samples; ++k) {
    const auto x = detail::chart(d, 2.0 * std::numbers::pi * static_cast<double>(k) / samples, 1.0).x;
    b[0] = std::min(b[0], x[0]);
    b[1] = std::min(b[1], x[1]);
    b[2] = std::max(b[2], x[0]);
    b[3] = std::max(b[3], x[1]);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Grid.

struct BoundarySegment {
  Point2 a;
  Point2 b;
  Point2 normal;  // outward unit normal
  std::size_t cell = 0;
};

/// Cells are indexed c = j * nx + i, centre (x0 + (i + 1/2) h, y0 + (j + 1/2) h).
struct GridDomain2D {
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint8_t> mask;
  /// Active cells crossed by the boundary.
  std::vector<std::uint8_t> cut;
  /// Part of each active cell inside the polygon (counter-clockwise).
  std::vector<std::vector<Point2>> cell_polygon;
  /// Open part [lo, hi] of the face between (i, j) and (i + 1, j) along y.
  std::vector<std::array<double, 2>> east_aperture;
  /// Open part [lo, hi] of the face between (i, j) and (i, j + 1) along x.
  std::vector<std::array<double, 2>> north_aperture;
  std::vector<BoundarySegment> boundary;

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  double line_x(std::size_t i) const { return x0 + static_cast<double>(i) * h; }
  double line_y(std::size_t j) const { return y0 + static_cast<double>(j) * h; }
  Point2 center(std::size_t c) const {
    return {x0 + (static_cast<double>(c % nx) + 0.5) * h, y0 + (static_cast<double>(c / nx) + 0.5) * h};
  }
  bool active(std::size_t c) const { return mask[c] != 0; }
  std::size_t active_count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
};

namespace detail {

inline double aperture_length(const std::array<double, 2>& ap) { return ap[1] - ap[0]; }

/// Root of phi on the segment p -> q, where exactly one end is inside.
inline Point2 crossing(const std::function<double(Point2)>& phi, Point2 p, Point2 q) {
  auto f = [&](double t) { return phi({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])}); };
  std::uintmax_t iters = 100;
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(52),
                                                           iters);
  const double t = 0.5 * (lo + hi);
  return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
}

/// Inside part of the segment from p to q given the crossing (if any).
inline std::array<double, 2> open_interval(bool in_p, bool in_q, double p, double q, double cross) {
  if (in_p && in_q) return {p, q};
  if (in_p) return {p, cross};
  if (in_q) return {cross, q};
  return {p, p};
}

inline Rule1D unit_gauss(std::size_t order) { return jacobi_on_interval(order, 0.0, 1.0, 0.0, 0.0); }

}  // namespace detail

/// Cut-cell grid of spacing h for {phi < 0}, which must lie in the box
/// bb = {xmin, ymin, xmax, ymax}. Grid lines sit at integer multiples of h,
/// so h/2 refines h.
inline GridDomain2D make_grid_domain(const std::function<double(Point2)>& phi, const std::array<double, 4>& bb,
                                     double h) {
  if (!(h > 0.0)) throw InvalidArgument("grid spacing must be positive");
  if (bb[0] < kAxisMargin || bb[1] < kAxisMargin)
    throw InvalidArgument("domain must stay " + std::to_string(kAxisMargin) + " away from both axes");
  GridDomain2D g;
  g.h = h;
  g.x0 = (std::floor(bb[0] / h) - 1.0) * h;
  g.y0 = (std::floor(bb[1] / h) - 1.0) * h;
  g.nx = static_cast<std::size_t>(std::ceil((bb[2] - g.x0) / h)) + 1;
  g.ny = static_cast<std::size_t>(std::ceil((bb[3] - g.y0) / h)) + 1;
  const std::size_t nx = g.nx, ny = g.ny;
  auto node = [&](std::size_t i, std::size_t j) -> Point2 { return {g.line_x(i), g.line_y(j)}; };
  std::vector<std::uint8_t> inside((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) inside[j * (nx + 1) + i] = phi(node(i, j)) < 0.0;
  auto in = [&](std::size_t i, std::size_t j) { return inside[j * (nx + 1) + i] != 0; };

  // Crossings on horizontal edges (i, j)-(i+1, j) and vertical edges (i, j)-(i, j+1).
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Point2> hcross(nx * (ny + 1), Point2{nan, nan}), vcross((nx + 1) * ny, Point2{nan, nan});
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      if (in(i, j) != in(i + 1, j)) hcross[j * nx + i] = detail::crossing(phi, node(i, j), node(i + 1, j));
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      if (in(i, j) != in(i, j + 1)) vcross[j * (nx + 1) + i] = detail::crossing(phi, node(i, j), node(i, j + 1));

  g.mask.assign(nx * ny, 0);
  g.cut.assign(nx * ny, 0);
  g.cell_polygon.assign(nx * ny, {});
  g.east_aperture.assign(nx * ny, {0.0, 0.0});
  g.north_aperture.assign(nx * ny, {0.0, 0.0});
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      if (i + 1 < nx) {
        const Point2 p = node(i + 1, j), q = node(i + 1, j + 1);
        g.east_aperture[c] = detail::open_interval(in(i + 1, j), in(i + 1, j + 1), p[1], q[1],
                                                   vcross[j * (nx + 1) + i + 1][1]);
      }
      if (j + 1 < ny) {
        const Point2 p = node(i, j + 1), q = node(i + 1, j + 1);
        g.north_aperture[c] =
            detail::open_interval(in(i, j + 1), in(i + 1, j + 1), p[0], q[0], hcross[(j + 1) * nx + i][0]);
      }
      // Walk the square counter-clockwise, keeping inside corners and crossings.
      const std::array<std::array<std::size_t, 2>, 4> corner{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
      const std::array<Point2, 4> edge_cross{hcross[j * nx + i], vcross[j * (nx + 1) + i + 1],
                                             hcross[(j + 1) * nx + i], vcross[j * (nx + 1) + i]};
      std::vector<Point2> poly;
      std::vector<bool> is_cross;
      for (std::size_t k = 0; k < 4; ++k) {
        const auto [ci, cj] = corner[k];
        const auto [ni, nj] = corner[(k + 1) % 4];
        if (in(ci, cj)) {
          poly.push_back(node(ci, cj));
          is_cross.push_back(false);
        }
        if (in(ci, cj) != in(ni, nj)) {
          poly.push_back(edge_cross[k]);
          is_cross.push_back(true);
        }
      }
      if (poly.size() < 3) continue;
      // A boundary chord leaves the polygon at an exit crossing (inside ->
      // outside) and re-enters at the next vertex, which is a crossing too.
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const std::size_t l = (k + 1) % poly.size();
        if (!(is_cross[k] && is_cross[l])) continue;
        const Point2 a = poly[k], b = poly[l];
        if (a[0] == b[0] && a[1] == b[1]) continue;
        // Both crossings on one square side would mean the chord runs along
        // the side; only consecutive crossings on different sides form chords.
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        g.boundary.push_back({a, b, {(b[1] - a[1]) / len, -(b[0] - a[0]) / len}, c});
      }
      g.cut[c] = std::find(is_cross.begin(), is_cross.end(), true) != is_cross.end();
      g.cell_polygon[c] = std::move(poly);
      g.mask[c] = 1;
    }

  // A crossing that lands on a grid node up to rounding leaves slivers:
  // apertures shorter than kSliver h are closed, cells left without an open
  // face are dropped with their chords.
  for (auto* ap : {&g.east_aperture, &g.north_aperture})
    for (auto& a : *ap)
      if (detail::aperture_length(a) < kSliver * h) a = {a[0], a[0]};
  auto open = [&g](std::size_t c) {
    const std::size_t i = c % g.nx, j = c / g.nx;
    return detail::aperture_length(g.east_aperture[c]) > 0.0 || detail::aperture_length(g.north_aperture[c]) > 0.0 ||
           (i > 0 && detail::aperture_length(g.east_aperture[c - 1]) > 0.0) ||
           (j > 0 && detail::aperture_length(g.north_aperture[c - g.nx]) > 0.0);
  };
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.active(c) && !open(c)) {
      g.mask[c] = 0;
      g.cut[c] = 0;
      g.cell_polygon[c].clear();
    }
  std::erase_if(g.boundary, [&g](const BoundarySegment& s) { return !g.active(s.cell); });

  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.active(c))
      for (const Point2& v : g.cell_polygon[c])
        if (v[0] < kAxisMargin || v[1] < kAxisMargin)
          throw InvalidArgument("grid domain reaches within " + std::to_string(kAxisMargin) + " of an axis");

  // Connectivity through open faces.
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::queue<std::size_t> todo;
  std::size_t first = g.size();
  for (std::size_t c = 0; c < g.size() && first == g.size(); ++c)
    if (g.active(c)) first = c;
  if (first == g.size()) throw InvalidArgument("grid domain has no active cell");
  todo.push(first);
  seen[first] = 1;
  std::size_t reached = 0;
  while (!todo.empty()) {
    const std::size_t c = todo.front();
    todo.pop();
    ++reached;
    const std::size_t i = c % nx, j = c / nx;
    auto visit = [&](std::size_t nb, const std::array<double, 2>& ap) {
      if (detail::aperture_length(ap) > 0.0 && g.active(nb) && !seen[nb]) {
        seen[nb] = 1;
        todo.push(nb);
      }
    };
    if (i + 1 < nx) visit(c + 1, g.east_aperture[c]);
    if (i > 0) visit(c - 1, g.east_aperture[c - 1]);
    if (j + 1 < ny) visit(c + nx, g.north_aperture[c]);
    if (j > 0) visit(c - nx, g.north_aperture[c - nx]);
  }
  if (reached != g.active_count()) throw InvalidArgument("grid domain mask is not connected");
  return g;
}

inline GridDomain2D make_grid_domain(const PlanarDomain& d, double h) {
  return make_grid_domain([&d](Point2 x) { return level_value(d, x); }, domain_bbox(d), h);
}

/// Run-length encoded mask: {bbox, h, nx, ny, mask_rle: [[value, count], ...]}.
inline nlohmann::json domain_to_json(const GridDomain2D& g) {
  nlohmann::json rle = nlohmann::json::array();
  for (std::size_t c = 0; c < g.size();) {
    std::size_t e = c;
    while (e < g.size() && g.mask[e] == g.mask[c]) ++e;
    rle.push_back({static_cast<int>(g.mask[c]), e - c});
    c = e;
  }
  return {{"bbox", {g.x0, g.y0, g.x0 + g.h * static_cast<double>(g.nx), g.y0 + g.h * static_cast<double>(g.ny)}},
          {"h", g.h},
          {"nx", g.nx},
          {"ny", g.ny},
          {"mask_rle", rle}};
}

/// One row per grid row j; inactive cells are empty fields.
inline std::string grid_to_csv(const GridDomain2D& g, const std::vector<double>& u) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      if (i > 0) os << ',';
      if (g.active(g.index(i, j))) os << u[g.index(i, j)];
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Weighted geometry for a given A.

struct CellWeights {
  std::vector<double> volume;  // int_{cell} x^A
  std::vector<double> east;    // int_{east aperture} x^A dsigma
  std::vector<double> north;
  std::vector<double> boundary;  // int_{chords in cell} x^A dsigma
  double measure = 0.0;
  double perimeter = 0.0;
};

namespace detail {

/// int_lo^hi t^a dt for 0 < lo <= hi.
inline double power_integral(double a, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return (std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / (a + 1.0);
}

inline double polygon_weight_integral(const WeightVector& A, const std::vector<Point2>& poly, const Rule1D& gl) {
  // Fan triangles, each through the collapsed square (u, v) -> P0 + u (P1 - P0) + u v (P2 - P1).
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const Point2 p0 = poly[0], p1 = poly[k], p2 = poly[k + 1];
    const double area2 =
        std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    double s = 0.0;
    for (std::size_t a = 0; a < gl.size(); ++a)
      for (std::size_t b = 0; b < gl.size(); ++b) {
        const double u = gl.nodes[a], v = gl.nodes[b];
        const Point2 x{p0[0] + u * (p1[0] - p0[0]) + u * v * (p2[0] - p1[0]),
                       p0[1] + u * (p1[1] - p0[1]) + u * v * (p2[1] - p1[1])};
        s += gl.weights[a] * gl.weights[b] * u * A.weight(x);
      }
    total += area2 * s;
  }
  return total;
}

inline double segment_weight_integral(const WeightVector& A, Point2 a, Point2 b, const Rule1D& gl) {
  double s = 0.0;
  for (std::size_t k = 0; k < gl.size(); ++k) {
    const double t = gl.nodes[k];
    s += gl.weights[k] * A.weight(Point2{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
  }
  return s * std::hypot(b[0] - a[0], b[1] - a[1]);
}

}  // namespace detail

inline CellWeights cell_weights(const WeightVector& A, const GridDomain2D& g) {
  if (A.n() != 2) throw InvalidArgument("grid domains need a weight with n = 2");
  const Rule1D gl = detail::unit_gauss(6);
  CellWeights w;
  w.volume.assign(g.size(), 0.0);
  w.east.assign(g.size(), 0.0);
  w.north.assign(g.size(), 0.0);
  w.boundary.assign(g.size(), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::size_t i = c % g.nx, j = c / g.nx;
    const double xl = g.line_x(i), xr = g.line_x(i + 1), yl = g.line_y(j), yr = g.line_y(j + 1);
    w.east[c] = std::pow(xr, A[0]) * detail::power_integral(A[1], g.east_aperture[c][0], g.east_aperture[c][1]);
    w.north[c] = std::pow(yr, A[1]) * detail::power_integral(A[0], g.north_aperture[c][0], g.north_aperture[c][1]);
    if (!g.active(c)) continue;
    if (!g.cut[c])
      w.volume[c] = detail::power_integral(A[0], xl, xr) * detail::power_integral(A[1], yl, yr);
    else
      w.volume[c] = detail::polygon_weight_integral(A, g.cell_polygon[c], gl);
  }
  for (const BoundarySegment& s : g.boundary) w.boundary[s.cell] += detail::segment_weight_integral(A, s.a, s.b, gl);
  w.measure = pairwise_sum(w.volume);
  w.perimeter = pairwise_sum(w.boundary);
  return w;
}

// ---------------------------------------------------------------------------
// Operator and solver.

/// Normal derivative data on the boundary chords: g(x, outward normal).
using NeumannData = std::function<double(Point2, Point2)>;

/// x^{-A} div(x^A grad u) on every active cell, in flux form:
/// (1/V_c) [sum over faces of w_f (u_nb - u_c) / h + int_{chords} g x^A].
/// u is given on the whole grid (inactive cells act as the ghost layer).
/// Without `data` the boundary term is omitted.
inline std::vector<double> operator_apply(const WeightVector& A, const std::vector<double>& u, const GridDomain2D& g,
                                          const NeumannData& data = nullptr, std::size_t workers = 1) {
  if (u.size() != g.size()) throw InvalidArgument("grid function size does not match the domain");
  const CellWeights w = cell_weights(A, g);
  std::vector<double> bflux(g.size(), 0.0);
  if (data) {
    const Rule1D gl = detail::unit_gauss(6);
    for (const BoundarySegment& s : g.boundary) {
      double acc = 0.0;
      for (std::size_t k = 0; k < gl.size(); ++k) {
        const double t = gl.nodes[k];
        const Point2 x{s.a[0] + t * (s.b[0] - s.a[0]), s.a[1] + t * (s.b[1] - s.a[1])};
        acc += gl.weights[k] * A.weight(x) * data(x, s.normal);
      }
      bflux[s.cell] += acc * std::hypot(s.b[0] - s.a[0], s.b[1] - s.a[1]);
    }
  }
  const std::size_t nx = g.nx;
  const auto rows = parallel_map<std::vector<double>>(g.ny, workers, [&](std::size_t j) {
    std::vector<double> row(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      if (!g.active(c)) continue;
      double s = bflux[c];
      if (i + 1 < nx) s += w.east[c] * (u[c + 1] - u[c]) / g.h;
      if (i > 0) s += w.east[c - 1] * (u[c - 1] - u[c]) / g.h;
      if (j + 1 < g.ny) s += w.north[c] * (u[c + nx] - u[c]) / g.h;
      if (j > 0) s += w.north[c - nx] * (u[c - nx] - u[c]) / g.h;
      row[i] = s / w.volume[c];
    }
    return row;
  });
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.ny; ++j) std::copy(rows[j].begin(), rows[j].end(), out.begin() + j * nx);
  return out;
}

/// Discrete weighted inner product sum_c V_c u_c v_c over active cells.
inline double weighted_inner(const CellWeights& w, const GridDomain2D& g, const std::vector<double>& u,
                             const std::vector<double>& v) {
  std::vector<double> t;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.active(c)) t.push_back(w.volume[c] * u[c] * v[c]);
  return pairwise_sum(t);
}

struct NeumannSolution {
  std::vector<double> u;  // zero weighted mean; 0 on inactive cells
  double b = 0.0;
  double measure = 0.0;    // m_h
  double perimeter = 0.0;  // P_h
  std::size_t iterations = 0;
  double residual = 0.0;  // relative, as reported by CG
};

inline constexpr double kNeumannCgTolerance = 1e-12;
inline constexpr std::size_t kNeumannMaxIterations = 50000;

/// div(x^A grad u) = b x^A, u_nu = 1. Conjugate gradients on the symmetric
/// face-difference matrix; the right-hand side is projected onto the range
/// (sum zero), which is what the compatibility choice of b guarantees up to
/// rounding.
inline NeumannSolution solve_neumann(const WeightVector& A, const GridDomain2D& g) {
  const CellWeights w = cell_weights(A, g);
  std::vector<std::ptrdiff_t> id(g.size(), -1);
  std::size_t N = 0;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g.active(c)) id[c] = static_cast<std::ptrdiff_t>(N++);
  NeumannSolution sol;
  sol.measure = w.measure;
  sol.perimeter = w.perimeter;
  sol.b = w.perimeter / w.measure;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  auto couple = [&](std::size_t c, std::size_t d, double t) {
    if (t <= 0.0 || id[c] < 0 || id[d] < 0) return;
    trip.emplace_back(id[c], id[d], -t);
    trip.emplace_back(id[d], id[c], -t);
    diag[id[c]] += t;
    diag[id[d]] += t;
  };
  for (std::size_t c = 0; c < g.size(); ++c) {
    const std::size_t i = c % g.nx, j = c / g.nx;
    if (i + 1 < g.nx) couple(c, c + 1, w.east[c] / g.h);
    if (j + 1 < g.ny) couple(c, c + g.nx, w.north[c] / g.h);
  }
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(N); ++k) trip.emplace_back(k, k, diag[k]);
  Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  K.setFromTriplets(trip.begin(), trip.end());

  // K u = B - b V  (K = -h-scaled flux operator, positive semidefinite).
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(N));
  for (std::size_t c = 0; c < g.size(); ++c)
    if (id[c] >= 0) rhs[id[c]] = w.boundary[c] - sol.b * w.volume[c];
  rhs.array() -= rhs.mean();

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(kNeumannCgTolerance);
  cg.setMaxIterations(static_cast<Eigen::Index>(kNeumannMaxIterations));
  cg.compute(K);
  Eigen::VectorXd x = cg.solve(rhs);
  sol.iterations = static_cast<std::size_t>(cg.iterations());
  sol.residual = cg.error();
  if (cg.info() != Eigen::Success || !x.allFinite())
    throw NumericalFailure("Neumann CG did not converge: relative residual " + std::to_string(cg.error()) +
                           " after " + std::to_string(cg.iterations()) + " iterations");

  sol.u.assign(g.size(), 0.0);
  for (std::size_t c = 0; c < g.size(); ++c)
    if (id[c] >= 0) sol.u[c] = x[id[c]];
  std::vector<double> one(g.size(), 1.0);
  const double mean = weighted_inner(w, g, sol.u, one) / w.measure;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (id[c] >= 0) sol.u[c] -= mean;
  return sol;
}

// ---------------------------------------------------------------------------
// Certificates.

/// |b - P/m| <= max(1e-3, 5 h^2) b, with P and m from the chart.
inline VerificationReport compatibility_report(const WeightVector& A, const PlanarDomain& d, double h) {
  const GridDomain2D g = make_grid_domain(d, h);
  const NeumannSolution sol = solve_neumann(A, g);
  const ReferenceValues ref = reference_values(A, d);
  const double ratio = ref.perimeter / ref.measure;
  const double tol = std::max(1e-3, 5.0 * h * h) * sol.b;
  VerificationReport r =
      make_report("neumann_compatibility", std::abs(sol.b - ratio), 0.0, ratio, Provenance::closed_form, tol,
                  domain_name(d));
  r.discretization = {{"h", h}, {"cells", g.active_count()}, {"iterations", sol.iterations}};
  r.details = {{"b", sol.b},
               {"P_over_m", ratio},
               {"relative_error", std::abs(sol.b - ratio) / ratio},
               {"cg_residual", sol.residual},
               {"measure_h", sol.measure},
               {"perimeter_h", sol.perimeter},
               {"measure", ref.measure},
               {"perimeter", ref.perimeter}};
  return r;
}

/// (b/D)^D m(Omega) >= m(B_1^*) (1 - tol).
inline VerificationReport abp_chain_check(const WeightVector& A, double b, double measure, double tol = 1e-6) {
  const double D = A.D();
  const double lhs = ball_measure(A);
  const double rhs = std::pow(b / D, D) * measure;
  VerificationReport r = make_report("abp_chain", lhs, rhs, D, Provenance::closed_form, tol * lhs, "b=" + std::to_string(b));
  r.details = {{"b", b}, {"measure", measure}};
  return r;
}

/// u = |x|^2/2 on B_1^*: the operator returns D and u_nu = x.x = 1, so the
/// compatibility constant of the ball is D = P(B_1^*)/m(B_1^*).
inline VerificationReport ball_solution_certificate(const WeightVector& A, std::size_t samples = 512) {
  const std::size_t n = A.n();
  const double D = A.D();
  std::vector<bool> singular(n);
  for (std::size_t i = 0; i < n; ++i) singular[i] = A.positive(i);
  const QuadratureRule sph = sphere_rule(A, singular, n == 1 ? 1 : (n == 2 ? samples : 24));
  double op_dev = 0.0, normal_dev = 0.0;
  for (std::size_t k = 0; k < sph.size(); ++k) {
    const auto w = sph.node(k);
    for (double rho : {0.25, 0.5, 1.0}) {
      // Delta u + sum A_i/x_i u_{x_i} with u_{x_i} = x_i, Delta u = n.
      double op = static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        if (A.positive(i)) op += A[i] / (rho * w[i]) * (rho * w[i]);
      op_dev = std::max(op_dev, std::abs(op - D));
    }
    double xx = 0.0;
    for (std::size_t i = 0; i < n; ++i) xx += w[i] * w[i];
    normal_dev = std::max(normal_dev, std::abs(xx - 1.0));
  }
  const double ratio = ball_perimeter(A) / ball_measure(A);
  VerificationReport r = make_report("ball_solution", D, ratio, D, Provenance::closed_form, 1e-12 * D,
                                     "u=|x|^2/2 on B_1^*");
  r.margin = -std::abs(ratio - D);
  r.pass = r.margin >= -r.tolerance && op_dev <= 1e-12 * D && normal_dev <= 1e-14;
  r.details = {{"operator_deviation", op_dev}, {"normal_derivative_deviation", normal_dev}, {"P_over_m", ratio}};
  return r;
}

}  // namespace monoweight
