#pragma once

// Weighted radial decreasing rearrangement by superlevel-radius inversion:
// for each level t the radius r(t) = (mu(t) / m(B_1^*))^{1/D} with
// mu(t) = m({|u| > t}), and u_* interpolates the points (r(t), t).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/gauss.hpp"
#include "monoweight/monte_carlo.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/test_function.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

inline constexpr std::size_t kRearrangementLevels = 256;
inline constexpr double kLowestLevelFraction = 1e-4;
inline constexpr std::size_t kMaxDistributionDim = 8;
/// Cells crossed by a level are split while A_i w_i / |x_i| exceeds this.
inline constexpr double kWeightVariationTolerance = 0.05;

struct DistributionOptions {
  /// Cells per axis of the uniform grid over the support box; 0 picks a
  /// default by dimension.
  std::size_t cells_per_axis = 0;
  /// Cells crossed by a level are split while the deviation of u from its
  /// tangent plane exceeds this fraction of the band; 0 picks a default.
  double linearisation_tolerance = 0.0;
  /// Maximum number of halvings of a grid cell; 0 picks a default.
  std::size_t max_depth = 0;
  std::size_t workers = 1;
};

namespace detail {

inline std::size_t default_cells(std::size_t n) {
  switch (n) {
    case 1: return 4000;
    case 2: return 200;
    default: return 32;
  }
}

/// Volume fraction of the unit cube [0,1]^m below the plane sum b_i y_i = s
/// (b_i >= 0), by inclusion-exclusion over the vertices. Axes with b_i
/// negligible against sum b drop out.
inline double cube_fraction_below(std::span<const double> b, double s) {
  double total = 0.0;
  for (double c : b) total += c;
  if (s <= 0.0) return 0.0;
  if (s >= total) return 1.0;
  double active[8];
  std::size_t m = 0;
  double prod = 1.0;
  for (double c : b)
    if (c > 1e-6 * total) {
      active[m++] = c;
      prod *= c;
    }
  double sum = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double shift = 0.0;
    int sign = 1;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) {
        shift += active[i];
        sign = -sign;
      }
    const double e = s - shift;
    if (e > 0.0) {
      double term = 1.0;
      for (std::size_t k = 0; k < m; ++k) term *= e;
      sum += sign * term;
    }
  }
  double factorial = 1.0;
  for (std::size_t k = 2; k <= m; ++k) factorial *= static_cast<double>(k);
  return std::clamp(sum / (factorial * prod), 0.0, 1.0);
}

// Planar leaves misjudge small closed level sets near a maximum by a fixed
// fraction of their measure; 0.01 keeps high-exponent norms within 1e-3 in 2D.
inline double default_linearisation_tolerance(std::size_t n) { return n <= 2 ? 0.01 : 0.03; }

/// Support box of u clipped to the closed orthant.
inline bool support_box(const WeightVector& A, const TestFunction& u, std::vector<double>& lo, std::vector<double>& hi) {
  lo.resize(A.n());
  hi.resize(A.n());
  for (std::size_t i = 0; i < A.n(); ++i) {
    lo[i] = u.center[i] - u.support_radius;
    hi[i] = u.center[i] + u.support_radius;
    if (A.positive(i)) {
      lo[i] = std::max(lo[i], 0.0);
      if (hi[i] <= 0.0) return false;
    }
  }
  return true;
}

inline double axis_cell_mass(double a, double lo, double hi) {
  auto F = [a](double x) { return (x < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(x), a + 1.0) / (a + 1.0); };
  return F(hi) - F(lo);
}

}  // namespace detail

/// mu(t_j) = m({|u| > t_j}) over R^n_* for every level, in one sweep.
///
/// Each grid cell contributes its exact weighted volume times a smoothed
/// indicator: with v = |u(center)|, g = grad u(center) and band
/// b = sum_j h_j |g_j|, levels in [v - b, v + b] receive the volume fraction
/// of the cell beyond the planar level set, whose offset along g is
/// corrected for the curvature of u in that direction. Cells meeting the edge of the
/// support, or crossed by a level where u is far from its tangent plane,
/// are halved recursively to a fixed depth. The level t = 0 uses the sharp indicator v > 0, since u vanishes
/// to higher order at the edge of its support.
inline std::vector<double> distribution_function(const WeightVector& A, const TestFunction& u,
                                                 const std::vector<double>& levels,
                                                 const DistributionOptions& opt = {}) {
  if (u.dim != A.n()) throw InvalidArgument("test function dimension does not match weight");
  for (double t : levels)
    if (t < 0.0) throw InvalidArgument("distribution function needs t >= 0");
  const std::size_t n = A.n();
  if (n > kMaxDistributionDim) throw InvalidArgument("distribution function supports n <= 8");
  std::vector<double> lo, hi;
  if (!detail::support_box(A, u, lo, hi)) return std::vector<double>(levels.size(), 0.0);
  const std::size_t N = opt.cells_per_axis ? opt.cells_per_axis : detail::default_cells(n);
  const std::size_t max_depth = opt.max_depth ? opt.max_depth : n <= 2 ? 6 : 4, edge_depth = n == 1 ? 6 : n == 2 ? 4 : 2;
  const double lin_tol = opt.linearisation_tolerance > 0.0 ? opt.linearisation_tolerance
                                                           : detail::default_linearisation_tolerance(n);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = (hi[i] - lo[i]) / static_cast<double>(N);

  std::vector<std::size_t> order(levels.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });
  std::vector<double> sorted(levels.size());
  for (std::size_t j = 0; j < order.size(); ++j) sorted[j] = levels[order[j]];
  const std::size_t L = sorted.size();
  const std::size_t first_positive =
      static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin());

  struct Accumulator {
    std::vector<double> full, partial;
  };

  // Adds V * fraction(t) for a cell with centre value v, gradient norm gn,
  // second derivative kappa of |u| along its gradient and extents
  // b_i = w_i |n_i| along the unit gradient n. The level set is the plane
  // at offset d along n with v + gn d + kappa d^2 / 2 = t, and the fraction
  // is the exact volume of the cell beyond it.
  auto deposit = [&](Accumulator& acc, double v, double gn, double kappa, std::span<const double> b, double V) {
    if (!(v > 0.0) || !(V > 0.0)) return;
    double wn = 0.0;
    for (double c : b) wn += c;
    // Zero levels take the sharp indicator, so they always receive V.
    // Levels whose plane meets the cell.
    const double reach = 0.5 * gn * wn + 0.125 * std::abs(kappa) * wn * wn;
    const double tlo = v - reach, thi = v + reach;
    const std::size_t i0 = std::max(first_positive, static_cast<std::size_t>(
                                                        std::lower_bound(sorted.begin(), sorted.end(), tlo) - sorted.begin()));
    acc.full[0] += V;
    acc.full[i0] -= V;
    for (std::size_t j = i0; j < L && sorted[j] < thi; ++j) {
      const double r = sorted[j] - v;
      const double disc = gn * gn + 2.0 * kappa * r;
      double f;
      if (wn <= 0.0 || gn <= 0.0)
        f = r < 0.0 ? 1.0 : 0.0;
      else if (disc < 0.0)
        f = r > 0.0 ? 0.0 : 1.0;
      else
        f = 1.0 - detail::cube_fraction_below(b, 2.0 * r / (gn + std::sqrt(disc)) + 0.5 * wn);
      acc.partial[j] += V * f;
    }
  };

  const std::size_t chunks = std::min<std::size_t>(N, 64);
  auto work = [&](std::size_t chunk) {
    Accumulator acc{std::vector<double>(L + 1, 0.0), std::vector<double>(L, 0.0)};
    const std::size_t first = chunk * N / chunks, last = (chunk + 1) * N / chunks;
    std::vector<double> x(n), g(n), y(n), g2(n), dir(n), extent(n);
    // Cell [a, a + w]: deposit, or split into 2^n halves when the support
    // edge or a poorly linearised level crosses it.
    using Point = std::array<double, kMaxDistributionDim>;
    std::function<void(const Point&, Point, std::size_t)> visit =
        [&](const Point& a, Point w, std::size_t depth) {
          double dist2 = 0.0, hd2 = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            x[i] = a[i] + 0.5 * w[i];
            dist2 += (x[i] - u.center[i]) * (x[i] - u.center[i]);
            hd2 += 0.25 * w[i] * w[i];
          }
          const double dist = std::sqrt(dist2), half_diag = std::sqrt(hd2);
          if (dist - half_diag >= u.support_radius) return;
          const double signed_v = u.value(x), v = std::abs(signed_v);
          u.grad(x, g);
          double band = 0.0;
          for (std::size_t i = 0; i < n; ++i) band += w[i] * std::abs(g[i]);
          bool split = false;
          // Edge of the support: the linear model meets zero, or the centre
          // is outside while a corner is inside.
          if (depth < edge_depth && first_positive > 0) {
            if (v > 0.0) {
              split = v <= band;
            } else {
              const std::size_t corners = std::size_t{1} << n;
              for (std::size_t mask = 0; mask < corners && !split; ++mask) {
                for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + ((mask >> i & 1) ? w[i] : 0.0);
                split = u.value(y) != 0.0;
              }
            }
          }
          // Deviation from the tangent plane at the face centres; levels
          // within band + 2 dev of v may cross the cell.
          double dev = 0.0;
          if (v > 0.0)
            for (std::size_t i = 0; i < n; ++i)
              for (double side : {-0.5, 0.5}) {
                y = x;
                y[i] += side * w[i];
                dev = std::max(dev, std::abs(u.value(y) - signed_v - side * w[i] * g[i]));
              }
          const auto near = std::lower_bound(sorted.begin() + first_positive, sorted.end(), v - band - 2.0 * dev);
          const bool crossed = v > 0.0 && near != sorted.end() && *near <= v + band + 2.0 * dev;
          if (!split && depth < max_depth && crossed) {
            split = dev > lin_tol * band;
            // Weight far from constant across the cell.
            for (std::size_t i = 0; i < n && !split; ++i)
              if (A.positive(i)) split = A[i] * w[i] > kWeightVariationTolerance * std::abs(x[i]);
          }
          if (split) {
            for (std::size_t i = 0; i < n; ++i) w[i] *= 0.5;
            const std::size_t children = std::size_t{1} << n;
            for (std::size_t mask = 0; mask < children; ++mask) {
              Point b = a;
              for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) b[i] += w[i];
              visit(b, w, depth + 1);
            }
            return;
          }
          double V = 1.0;
          for (std::size_t i = 0; i < n; ++i) V *= detail::axis_cell_mass(A[i], a[i], a[i] + w[i]);
          double gn = 0.0, wn = 0.0, kappa = 0.0;
          for (double c : g) gn += c * c;
          gn = std::sqrt(gn);
          std::fill(extent.begin(), extent.end(), 0.0);
          if (gn > 0.0) {
            const double sigma = signed_v < 0.0 ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n; ++i) {
              extent[i] = w[i] * std::abs(g[i]) / gn;
              wn += extent[i];
            }
            if (crossed) {
              const double step = 0.25 * wn;
              for (std::size_t i = 0; i < n; ++i) {
                dir[i] = sigma * g[i] / gn;
                y[i] = x[i] + step * dir[i];
              }
              u.grad(y, g2);
              double dd = 0.0;
              for (std::size_t i = 0; i < n; ++i) dd += sigma * g2[i] * dir[i];
              kappa = (dd - gn) / step;
            }
          }
          deposit(acc, v, gn, kappa, extent, V);
        };
    std::vector<std::size_t> idx(n, 0);
    std::size_t inner = 1;
    for (std::size_t i = 1; i < n; ++i) inner *= N;
    for (std::size_t c0 = first; c0 < last; ++c0) {
      idx[0] = c0;
      for (std::size_t i = 1; i < n; ++i) idx[i] = 0;
      for (std::size_t count = 0; count < inner; ++count) {
        Point a{}, w{};
        for (std::size_t i = 0; i < n; ++i) {
          a[i] = lo[i] + static_cast<double>(idx[i]) * h[i];
          w[i] = h[i];
        }
        visit(a, w, 0);
        for (std::size_t d = n; d-- > 1;) {
          if (++idx[d] < N) break;
          idx[d] = 0;
        }
      }
    }
    std::vector<double> mu(L, 0.0);
    double run = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      run += acc.full[j];
      mu[j] = run + acc.partial[j];
    }
    return mu;
  };
  const auto parts = parallel_map<std::vector<double>>(chunks, opt.workers, work);
  std::vector<double> out(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    double s = 0.0;
    for (const auto& p : parts) s += p[j];
    out[order[j]] = s;
  }
  return out;
}

inline double distribution_function(const WeightVector& A, const TestFunction& u, double t,
                                    const DistributionOptions& opt = {}) {
  return distribution_function(A, u, std::vector<double>{t}, opt)[0];
}

/// Monte Carlo cross-check of mu(t) on the support box.
inline MonteCarloEstimate distribution_function_mc(const WeightVector& A, const TestFunction& u, double t,
                                                   std::size_t samples, std::uint64_t seed) {
  if (t < 0.0) throw InvalidArgument("distribution function needs t >= 0");
  std::vector<double> lo, hi;
  if (!detail::support_box(A, u, lo, hi)) return {};
  return monte_carlo_integrate(
      A, [&](std::span<const double> x) { return std::abs(u.value(x)) > t ? 1.0 : 0.0; }, lo, hi,
      [](std::span<const double>) { return true; }, samples, seed);
}

/// max |u|: the declared value when available, else the largest cell-centre value.
inline double estimated_max_abs(const WeightVector& A, const TestFunction& u, std::size_t cells = 0) {
  if (u.max_abs) return *u.max_abs;
  std::vector<double> lo, hi;
  if (!detail::support_box(A, u, lo, hi)) return 0.0;
  const std::size_t n = A.n();
  const std::size_t N = cells ? cells : detail::default_cells(n);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n);
  double best = 0.0;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= N;
  for (std::size_t c = 0; c < total; ++c) {
    for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] + (static_cast<double>(idx[i]) + 0.5) * (hi[i] - lo[i]) / N;
    best = std::max(best, std::abs(u.value(x)));
    for (std::size_t d = n; d-- > 0;) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }
  return best;
}

/// 256 log-spaced levels between 1e-4 max and max.
inline std::vector<double> default_levels(double max_value, std::size_t count = kRearrangementLevels) {
  std::vector<double> t(count);
  const double lo = std::log(kLowestLevelFraction * max_value), hi = std::log(max_value);
  for (std::size_t j = 0; j < count; ++j)
    t[j] = std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1));
  t.back() = max_value;
  return t;
}

/// Pool-adjacent-violators projection onto non-increasing sequences.
inline std::vector<double> isotonic_nonincreasing(const std::vector<double>& y) {
  std::vector<double> val;
  std::vector<std::size_t> len;
  for (double v : y) {
    val.push_back(v);
    len.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] < val.back()) {
      const std::size_t l = len[len.size() - 2] + len.back();
      const double m = (val[val.size() - 2] * len[len.size() - 2] + val.back() * len.back()) / l;
      val.pop_back();
      len.pop_back();
      val.back() = m;
      len.back() = l;
    }
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < val.size(); ++k) out.insert(out.end(), len[k], val[k]);
  return out;
}

/// Non-increasing profile on radii 0 = r_0 <= ... <= r_M with value 0 at
/// r_M, linear in r^D on each segment. Equivalently m({u_* > t}) is linear
/// in t between the measured levels.
struct RadialProfile {
  std::vector<double> radii;
  std::vector<double> values;
  double D = 0.0;
  /// Levels mu was measured at and the measured mu (for equimeasurability).
  std::vector<double> levels;
  std::vector<double> mu;
  /// Largest isotonic correction applied to mu.
  double isotonic_correction = 0.0;

  /// Segment containing r: index j with radii[j-1] <= r < radii[j].
  std::size_t segment(double r) const {
    return static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), r) - radii.begin());
  }

  double power(double r) const { return std::pow(r, D); }

  /// d u_* / d(r^D) on segment j.
  double segment_rate(std::size_t j) const {
    const double d = power(radii[j]) - power(radii[j - 1]);
    return d > 0.0 ? (values[j] - values[j - 1]) / d : 0.0;
  }

  double operator()(double r) const {
    if (r <= radii.front()) return values.front();
    if (r >= radii.back()) return 0.0;
    const std::size_t j = segment(r);
    if (radii[j] == radii[j - 1]) return values[j];
    return values[j - 1] + segment_rate(j) * (power(r) - power(radii[j - 1]));
  }

  /// |u_*'(r)|, right-sided at the nodes.
  double slope(double r) const {
    if (r < 0.0 || r >= radii.back()) return 0.0;
    return D * std::pow(r, D - 1.0) * std::abs(segment_rate(segment(r)));
  }

  /// Radius where the profile drops to level t (largest r with u_* >= t).
  double level_radius(double t) const {
    if (t >= values.front()) return 0.0;
    for (std::size_t j = 1; j < radii.size(); ++j)
      if (values[j] <= t) {
        const double v0 = values[j - 1], v1 = values[j];
        if (v0 == v1) return radii[j - 1];
        const double a = power(radii[j - 1]), b = power(radii[j]);
        return std::pow(a + (b - a) * (v0 - t) / (v0 - v1), 1.0 / D);
      }
    return radii.back();
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "radius,value\n";
    for (std::size_t j = 0; j < radii.size(); ++j) os << radii[j] << ',' << values[j] << '\n';
    return os.str();
  }
};

inline constexpr double kMonotoneTolerance = 1e-6;

/// u_* from the superlevel measures at `levels` (ascending, positive).
/// Violations of monotonicity larger than 1e-6 m(supp u) signal quadrature
/// failure; smaller ones are removed by isotonic projection.
inline RadialProfile rearrange(const WeightVector& A, const TestFunction& u, std::vector<double> levels = {},
                               const DistributionOptions& opt = {}) {
  const double umax = estimated_max_abs(A, u);
  if (!(umax > 0.0)) throw InvalidArgument("rearrangement of the zero function");
  if (levels.empty()) levels = default_levels(umax);
  std::sort(levels.begin(), levels.end());
  std::vector<double> query{0.0};
  query.insert(query.end(), levels.begin(), levels.end());
  const std::vector<double> raw = distribution_function(A, u, query, opt);
  const double support_measure = raw[0];
  double worst = 0.0;
  for (std::size_t j = 1; j < raw.size(); ++j) worst = std::max(worst, raw[j] - raw[j - 1]);
  if (worst > kMonotoneTolerance * support_measure)
    throw NumericalFailure("distribution function increases by " + std::to_string(worst) +
                           " between levels; quadrature failure");
  const std::vector<double> mu = isotonic_nonincreasing(raw);
  RadialProfile prof;
  prof.D = A.D();
  for (std::size_t j = 0; j < raw.size(); ++j) prof.isotonic_correction = std::max(prof.isotonic_correction, std::abs(mu[j] - raw[j]));
  const double mb = ball_measure(A);
  auto radius = [&](double m) { return std::pow(std::max(m, 0.0) / mb, 1.0 / prof.D); };
  // Points in increasing radius: (0, max), (r(t_j), t_j) for descending t, (r(0), 0).
  prof.radii.push_back(0.0);
  prof.values.push_back(umax);
  for (std::size_t j = levels.size(); j-- > 0;) {
    if (levels[j] >= umax) continue;
    prof.radii.push_back(std::max(radius(mu[j + 1]), prof.radii.back()));
    prof.values.push_back(levels[j]);
  }
  prof.radii.push_back(std::max(radius(mu[0]), prof.radii.back()));
  prof.values.push_back(0.0);
  prof.levels = levels;
  prof.mu.assign(mu.begin() + 1, mu.end());
  return prof;
}

// ---------------------------------------------------------------------------
// Integrals of the rearranged function (radial reduction, per segment).

/// P(B_1^*) sum_j int_{r_{j-1}}^{r_j} r^{D-1} h_j(r) dr, 16-point
/// Gauss-Legendre per segment.
inline double profile_segment_integral(const WeightVector& A, const RadialProfile& prof,
                                       const std::function<double(std::size_t, double)>& h) {
  static const Rule1D gl = gauss_legendre(16);
  double s = 0.0;
  for (std::size_t j = 1; j < prof.radii.size(); ++j) {
    const double a = prof.radii[j - 1], b = prof.radii[j];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < gl.size(); ++k) {
      const double r = mid + half * gl.nodes[k];
      s += half * gl.weights[k] * std::pow(r, prof.D - 1.0) * h(j, r);
    }
  }
  return ball_perimeter(A) * s;
}

/// int_{R^n_*} f(u_*) x^A dx by radial reduction.
inline double profile_integral(const WeightVector& A, const RadialProfile& prof, const std::function<double(double)>& f) {
  return profile_segment_integral(A, prof, [&](std::size_t j, double r) {
    return f(prof.values[j - 1] + prof.segment_rate(j) * (prof.power(r) - prof.power(prof.radii[j - 1])));
  });
}

/// int Phi(|grad u_*|) x^A dx with the slope of each segment (one-sided at
/// the nodes, which carry no mass).
inline double profile_gradient_integral(const WeightVector& A, const RadialProfile& prof,
                                        const std::function<double(double)>& phi) {
  return profile_segment_integral(
      A, prof, [&](std::size_t j, double r) {
        return phi(prof.D * std::pow(r, prof.D - 1.0) * std::abs(prof.segment_rate(j)));
      });
}

/// Tensor quadrature of int f(u, |grad u|) x^A over the support box.
inline double support_integral(const WeightVector& A, const TestFunction& u,
                               const std::function<double(double, double)>& f, std::size_t order = 12,
                               std::size_t panels = 8) {
  const QuadratureRule rule = support_rule(A, u, order, panels);
  std::vector<double> g(A.n());
  return integrate_weighted(
      [&](std::span<const double> x) {
        u.grad(x, g);
        double gn = 0.0;
        for (double c : g) gn += c * c;
        return f(std::abs(u.value(x)), std::sqrt(gn));
      },
      rule);
}

struct EquimeasurabilityReport {
  /// max_t |mu_ref(t) - m({u_* > t})| / m(supp u) over the levels.
  double max_error = 0.0;
  double support_measure = 0.0;
};

/// Compares m({u_* > t}) (from the profile) against mu(t) recomputed on a
/// grid with `refine` times as many cells per axis.
inline EquimeasurabilityReport equimeasurability(const WeightVector& A, const TestFunction& u,
                                                 const RadialProfile& prof, std::size_t refine = 2,
                                                 std::size_t workers = 1) {
  DistributionOptions opt;
  opt.cells_per_axis = refine * detail::default_cells(A.n());
  opt.workers = workers;
  std::vector<double> query{0.0};
  query.insert(query.end(), prof.levels.begin(), prof.levels.end());
  const auto ref = distribution_function(A, u, query, opt);
  EquimeasurabilityReport rep;
  rep.support_measure = ref[0];
  const double mb = ball_measure(A);
  for (std::size_t j = 0; j < prof.levels.size(); ++j) {
    const double m_star = mb * std::pow(prof.level_radius(prof.levels[j]), prof.D);
    rep.max_error = std::max(rep.max_error, std::abs(ref[j + 1] - m_star));
  }
  rep.max_error /= rep.support_measure;
  return rep;
}

struct PolyaSzegoResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  std::string slope_convention = "one-sided slopes of the piecewise-linear profile";
};

inline constexpr double kPolyaSzegoRelTolerance = 5e-3;

/// lhs = int Phi(|grad u_*|) x^A, rhs = int Phi(|grad u|) x^A; pass iff
/// lhs <= rhs (1 + 5e-3).
inline PolyaSzegoResult polya_szego_check(const WeightVector& A, const TestFunction& u,
                                          const std::function<double(double)>& phi,
                                          const RadialProfile* profile = nullptr) {
  if (phi(0.0) != 0.0) throw InvalidArgument("Young function must vanish at 0");
  RadialProfile local;
  if (!profile) {
    local = rearrange(A, u);
    profile = &local;
  }
  PolyaSzegoResult r;
  r.lhs = profile_gradient_integral(A, *profile, phi);
  r.rhs = support_integral(A, u, [&](double, double g) { return phi(g); });
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs * (1.0 + kPolyaSzegoRelTolerance);
  return r;
}

}  // namespace monoweight
