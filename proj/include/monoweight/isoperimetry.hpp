#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/monte_carlo.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/shape.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

inline constexpr double kIsoperimetricTolerance = 1e-6;

struct IsoperimetricReport {
  double measure = 0.0;
  double perimeter = 0.0;
  double quotient = 0.0;
  double sharp_constant = 0.0;
  double margin = 0.0;
  double tolerance = kIsoperimetricTolerance;
  bool pass = false;
  /// |margin| <= tolerance: the shape attains the bound as sector balls do.
  /// Uniqueness of minimisers is never claimed.
  bool consistent_with_sector_ball = false;
  nlohmann::json shape;
  nlohmann::json discretization;
};

inline nlohmann::json to_json(const IsoperimetricReport& r) {
  return {{"measure", r.measure},
          {"perimeter", r.perimeter},
          {"quotient", r.quotient},
          {"sharp_constant", r.sharp_constant},
          {"margin", r.margin},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"consistent_with_sector_ball", r.consistent_with_sector_ball},
          {"shape", r.shape},
          {"discretization", r.discretization}};
}

/// Q = P / m^{(D-1)/D} compared against C_1 = D m(B_1^*)^{1/D}.
inline IsoperimetricReport isoperimetric_quotient(const WeightVector& A, const Shape& s,
                                                  double tolerance = kIsoperimetricTolerance,
                                                  std::size_t order = kShapeOrder) {
  IsoperimetricReport r;
  const double D = A.D();
  r.measure = shape_measure(A, s, order);
  r.perimeter = shape_perimeter(A, s, order);
  r.quotient = r.perimeter / std::pow(r.measure, (D - 1.0) / D);
  r.sharp_constant = isoperimetric_constant(A);
  r.margin = r.quotient - r.sharp_constant;
  r.tolerance = tolerance;
  r.pass = r.margin >= -tolerance;
  r.consistent_with_sector_ball = std::abs(r.margin) <= tolerance;
  r.shape = shape_to_json(A, s);
  const bool closed = std::holds_alternative<SectorBall>(s.kind) || std::holds_alternative<Box>(s.kind);
  r.discretization = {{"order", order}, {"method", closed ? "closed_form" : "gauss_jacobi"}};
  return r;
}

// ---------------------------------------------------------------------------
// Random corpus.

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline Shape random_box(const WeightVector& A, std::mt19937_64& rng) {
  Box b;
  for (std::size_t i = 0; i < A.n(); ++i) {
    double lo;
    if (A.positive(i)) lo = uniform01(rng) < 0.5 ? 0.0 : uniform(rng, 0.0, 1.5);
    else lo = uniform(rng, -1.0, 1.0);
    b.lo.push_back(lo);
    b.hi.push_back(lo + uniform(rng, 0.1, 2.0));
  }
  return {b, Containment::orthant};
}

inline Shape random_shifted_ball(const WeightVector& A, std::mt19937_64& rng) {
  ShiftedBall b;
  b.r = uniform(rng, 0.2, 1.5);
  for (std::size_t i = 0; i < A.n(); ++i) {
    if (A.positive(i)) b.c.push_back(uniform01(rng) < 0.3 ? 0.0 : b.r + uniform(rng, 0.0, 2.0));
    else b.c.push_back(uniform(rng, -2.0, 2.0));
  }
  return {b, Containment::orthant};
}

inline Shape random_ellipsoid(const WeightVector& A, std::mt19937_64& rng) {
  EllipsoidSector e;
  for (std::size_t i = 0; i < A.n(); ++i) e.semi_axes.push_back(uniform(rng, 0.3, 2.0));
  return {e, Containment::orthant};
}

inline Shape random_star(const WeightVector& A, std::mt19937_64& rng) {
  for (;;) {
    Star2D s;
    s.coeffs.push_back(uniform(rng, 0.5, 2.0));
    const std::size_t modes = 1 + static_cast<std::size_t>(uniform01(rng) * 6.0);
    for (std::size_t j = 1; j <= modes; ++j) {
      const double amp = uniform(rng, -0.3, 0.3) * s.coeffs[0] / static_cast<double>(j);
      s.coeffs.push_back(A.k() == 0 && j % 2 == 1 ? 0.0 : amp);
    }
    if (star_min_profile(s) > 0.2 * s.coeffs[0]) return {s, Containment::orthant};
  }
}

}  // namespace detail

/// Deterministic corpus cycling through boxes, shifted balls, ellipsoid
/// sectors and (n = 2) perturbed stars.
inline std::vector<Shape> random_shape_corpus(const WeightVector& A, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Shape> out;
  const std::size_t kinds = A.n() == 2 ? 4 : 3;
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % kinds) {
      case 0: out.push_back(detail::random_box(A, rng)); break;
      case 1: out.push_back(detail::random_shifted_ball(A, rng)); break;
      case 2: out.push_back(detail::random_ellipsoid(A, rng)); break;
      default: out.push_back(detail::random_star(A, rng)); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting monotonicity.

/// Orthant pieces of a symmetric shape, each reflected into R^n_*. Pieces of
/// measure zero are dropped.
inline std::vector<Shape> reflected_pieces(const WeightVector& A, const Shape& s) {
  if (s.containment != Containment::symmetric) return {s};
  validate_shape(A, s);
  const std::size_t n = A.n();
  std::vector<Shape> out;
  if (const auto* b = std::get_if<Box>(&s.kind)) {
    std::vector<std::size_t> cut;
    for (std::size_t i = 0; i < n; ++i)
      if (A.positive(i) && b->lo[i] < 0.0 && b->hi[i] > 0.0) cut.push_back(i);
    for (std::size_t mask = 0; mask < (std::size_t{1} << cut.size()); ++mask) {
      Box piece = *b;
      for (std::size_t c = 0; c < cut.size(); ++c) {
        const std::size_t i = cut[c];
        if (mask & (std::size_t{1} << c)) {
          piece.lo[i] = 0.0;
          piece.hi[i] = -b->lo[i];
        } else {
          piece.lo[i] = 0.0;
        }
      }
      for (std::size_t i = 0; i < n; ++i)
        if (A.positive(i) && piece.hi[i] <= 0.0) {
          const double lo = piece.lo[i];
          piece.lo[i] = -piece.hi[i];
          piece.hi[i] = -lo;
        }
      out.push_back({piece, Containment::orthant});
    }
    return out;
  }
  if (const auto* b = std::get_if<ShiftedBall>(&s.kind)) {
    ShiftedBall piece = *b;
    for (std::size_t i = 0; i < n; ++i)
      if (A.positive(i)) piece.c[i] = std::abs(piece.c[i]);
    std::size_t copies = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (A.positive(i) && b->c[i] == 0.0) copies *= 2;
    for (std::size_t k = 0; k < copies; ++k) out.push_back({piece, Containment::orthant});
    return out;
  }
  Shape piece = s;
  piece.containment = Containment::orthant;
  for (std::size_t k = 0; k < (std::size_t{1} << A.k()); ++k) out.push_back(piece);
  return out;
}

struct SplittingCheck {
  double whole_quotient = 0.0;
  double min_piece_quotient = 0.0;
  std::size_t pieces = 0;
  bool pass = false;
};

/// Q(whole) >= min Q(piece) for a shape straddling reflection hyperplanes.
inline SplittingCheck splitting_check(const WeightVector& A, const Shape& symmetric_shape,
                                      double tolerance = kIsoperimetricTolerance) {
  SplittingCheck c;
  c.whole_quotient = isoperimetric_quotient(A, symmetric_shape, tolerance).quotient;
  c.min_piece_quotient = std::numeric_limits<double>::infinity();
  const auto pieces = reflected_pieces(A, symmetric_shape);
  c.pieces = pieces.size();
  for (const auto& p : pieces)
    c.min_piece_quotient = std::min(c.min_piece_quotient, isoperimetric_quotient(A, p, tolerance).quotient);
  c.pass = c.whole_quotient >= c.min_piece_quotient - tolerance;
  return c;
}

// ---------------------------------------------------------------------------
// Star shape search.

struct StarSearchResult {
  Star2D profile;
  std::vector<double> trace;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool aborted = false;
  bool stationary = false;
  double final_step = 0.0;
};

inline constexpr std::size_t kMaxConsecutiveRejections = 20;
inline constexpr double kStationaryGradient = 1e-7;
inline constexpr std::size_t kSearchOrder = 48;

inline double star_quotient(const WeightVector& A, const Star2D& s) {
  const Shape sh{s, Containment::orthant};
  return isoperimetric_quotient(A, sh, kIsoperimetricTolerance, kSearchOrder).quotient;
}

/// Descent on Q over the cosine coefficients. Gradient by central
/// differences with step 1e-4 |c|; each iterate is rescaled to the initial
/// weighted area. A step that loses positivity or raises Q is rejected and
/// the step size halved; accepted steps grow it by 1.5.
inline StarSearchResult star_shape_search(const WeightVector& A, const Star2D& init, std::size_t steps,
                                          double step_size) {
  if (A.n() != 2) throw InvalidArgument("star shape search needs n = 2");
  if (!(step_size > 0.0)) throw InvalidArgument("step size must be positive");
  const Shape init_shape{init, Containment::orthant};
  validate_shape(A, init_shape);
  const double D = A.D();
  const double target_area = shape_measure(A, init_shape, kSearchOrder);
  auto normalise = [&](Star2D s) {
    const double m = shape_measure(A, Shape{s, Containment::orthant}, kSearchOrder);
    const double lambda = std::pow(target_area / m, 1.0 / D);
    for (double& c : s.coeffs) c *= lambda;
    return s;
  };

  StarSearchResult res;
  res.profile = init;
  double q = star_quotient(A, init);
  res.trace.push_back(q);
  double eta = step_size;
  std::size_t streak = 0;
  std::size_t iter = 0;
  while (iter < steps) {
    std::vector<double>& c = res.profile.coeffs;
    double norm = 0.0;
    for (double v : c) norm += v * v;
    const double h = 1e-4 * std::sqrt(norm);
    std::vector<double> g(c.size());
    double gnorm = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      Star2D plus = res.profile, minus = res.profile;
      plus.coeffs[j] += h;
      minus.coeffs[j] -= h;
      g[j] = (star_quotient(A, plus) - star_quotient(A, minus)) / (2.0 * h);
      gnorm += g[j] * g[j];
    }
    if (std::sqrt(gnorm) < kStationaryGradient) {
      res.stationary = true;
      break;
    }
    // Inner loop: shrink until a step is accepted.
    for (;;) {
      Star2D cand = res.profile;
      for (std::size_t j = 0; j < c.size(); ++j) cand.coeffs[j] -= eta * g[j];
      bool ok = star_min_profile(cand) > 0.0;
      double qc = std::numeric_limits<double>::infinity();
      if (ok) {
        cand = normalise(cand);
        qc = star_quotient(A, cand);
        ok = qc <= q;
      }
      ++iter;
      if (ok) {
        res.profile = cand;
        q = qc;
        res.trace.push_back(q);
        ++res.accepted;
        streak = 0;
        eta *= 1.5;
        break;
      }
      ++res.rejected;
      eta *= 0.5;
      if (++streak >= kMaxConsecutiveRejections) {
        res.aborted = true;
        res.final_step = eta;
        return res;
      }
      if (iter >= steps) break;
    }
  }
  res.final_step = eta;
  return res;
}

/// Independent searches from several starting profiles, run concurrently.
inline std::vector<StarSearchResult> multi_start_search(const WeightVector& A, const std::vector<Star2D>& starts,
                                                        std::size_t steps, double step_size, std::size_t workers) {
  return parallel_map<StarSearchResult>(starts.size(), workers, [&](std::size_t i) {
    return star_shape_search(A, starts[i], steps, step_size);
  });
}

/// sup_t |rho(t) / mean(rho) - 1|.
inline double relative_sup_distance_from_constant(const Star2D& s, std::size_t samples = 1001) {
  std::vector<double> v(samples);
  double mean = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    v[i] = star_profile(s, static_cast<double>(i) / static_cast<double>(samples - 1));
    mean += v[i] / static_cast<double>(samples);
  }
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x / mean - 1.0));
  return d;
}

// ---------------------------------------------------------------------------
// Weighted AM-GM.

struct AmGm {
  double gm = 1.0;
  double am = 1.0;
};

/// gm = prod w_i^{l_i}, am = (sum l_i w_i / sum l_i)^{sum l_i}; gm <= am.
/// Entries with l_i = 0 contribute a factor 1 even when w_i = 0.
inline AmGm weighted_amgm(const std::vector<double>& w, const std::vector<double>& lambda) {
  if (w.size() != lambda.size()) throw InvalidArgument("weighted AM-GM needs equal-length inputs");
  double L = 0.0, s = 0.0, log_gm = 0.0;
  bool zero = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0 || lambda[i] < 0.0) throw InvalidArgument("weighted AM-GM needs nonnegative inputs");
    L += lambda[i];
    s += lambda[i] * w[i];
    if (lambda[i] == 0.0) continue;
    if (w[i] == 0.0) zero = true;
    else log_gm += lambda[i] * std::log(w[i]);
  }
  if (!(L > 0.0)) throw InvalidArgument("weighted AM-GM needs some lambda_i > 0");
  return {zero ? 0.0 : std::exp(log_gm), std::pow(s / L, L)};
}

}  // namespace monoweight
