#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "monoweight/isoperimetry.hpp"

using namespace monoweight;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent 25-digit parametric integrals.
constexpr double kEllipse21Perimeter = 1.555555555555555555555556;
constexpr double kStarMeasure = 0.1477025;
constexpr double kStarPerimeter = 0.6012099509472419840730519;
constexpr double kHalfStarMeasure = 0.9481309698167991322655353;
constexpr double kHalfStarPerimeter = 2.394708170504410329758201;
constexpr double kEllipsoid3Perimeter = 0.1487761643542278407635924;
constexpr double kEllipsoid3Measure = 0.0163624617374468397836596;

Shape sector(double r) { return {SectorBall{r}, Containment::orthant}; }
}  // namespace

TEST(ShapeMeasure, Examples) {
  WeightVector A{1.0, 1.0};
  EXPECT_NEAR(shape_measure(A, sector(2.0)), 2.0, 1e-14);
  EXPECT_NEAR(shape_measure(A, Shape{Box{{0.0, 0.0}, {1.0, 1.0}}}), 0.25, 1e-15);
  EXPECT_NEAR(shape_measure(WeightVector::zero(2), sector(1.0)), kPi, 1e-14);
}

TEST(ShapeMeasure, RejectsShapesOutsideOrthant) {
  WeightVector A{1.0, 1.0};
  EXPECT_THROW(shape_measure(A, Shape{Box{{-0.5, 0.0}, {1.0, 1.0}}}), InvalidArgument);
  EXPECT_NO_THROW(shape_measure(A, Shape{Box{{-0.5, 0.0}, {1.0, 1.0}}, Containment::symmetric}));
  EXPECT_THROW(shape_measure(A, Shape{ShiftedBall{1.0, {0.5, 3.0}}}), InvalidArgument);
  EXPECT_THROW(shape_measure(A, Shape{Star2D{{1.0, 1.5}}}), InvalidArgument);
  EXPECT_THROW(shape_measure(WeightVector{1.0, 1.0, 1.0}, Shape{Star2D{{1.0}}}), InvalidArgument);
  EXPECT_THROW(shape_measure(WeightVector::zero(2), Shape{Star2D{{1.0, 0.1}}}), InvalidArgument);
}

TEST(ShapePerimeter, Examples) {
  WeightVector A{1.0, 1.0};
  EXPECT_NEAR(shape_perimeter(A, sector(1.0)), 0.5, 1e-15);
  EXPECT_NEAR(shape_perimeter(A, Shape{Box{{0.0, 0.0}, {1.0, 1.0}}}), 1.0, 1e-15);
  EXPECT_NEAR(shape_perimeter(WeightVector::zero(2), Shape{ShiftedBall{1.0, {3.0, 3.0}}}), 2.0 * kPi, 1e-12);
}

TEST(ShapeMeasure, ShiftedBallMoments) {
  // int_{B((3,3),1)} xy = 9 pi, boundary integral 18 pi.
  WeightVector A{1.0, 1.0};
  const Shape b{ShiftedBall{1.0, {3.0, 3.0}}};
  EXPECT_NEAR(shape_measure(A, b), 9.0 * kPi, 1e-11);
  EXPECT_NEAR(shape_perimeter(A, b), 18.0 * kPi, 1e-11);
}

TEST(ShapePerimeter, EllipseAndStarOracles) {
  WeightVector A{1.0, 1.0};
  EXPECT_NEAR(shape_measure(A, Shape{EllipsoidSector{{2.0, 1.0}}}), 0.5, 1e-14);
  EXPECT_NEAR(shape_perimeter(A, Shape{EllipsoidSector{{2.0, 1.0}}}), kEllipse21Perimeter, 1e-12);
  const Shape star{Star2D{{1.0, 0.3}}};
  EXPECT_NEAR(shape_measure(A, star), kStarMeasure, 1e-13);
  EXPECT_NEAR(shape_perimeter(A, star), kStarPerimeter, 1e-12);
  // Half-plane sector: A = (0.5, 0), theta in [-pi/2, pi/2].
  WeightVector B{0.5, 0.0};
  const Shape half{Star2D{{1.0, 0.2, 0.1}}};
  EXPECT_NEAR(shape_measure(B, half), kHalfStarMeasure, 1e-11);
  EXPECT_NEAR(shape_perimeter(B, half), kHalfStarPerimeter, 1e-11);
  WeightVector C{1.0, 0.0, 2.0};
  const Shape ell{EllipsoidSector{{1.0, 2.0, 0.5}}};
  EXPECT_NEAR(shape_measure(C, ell), kEllipsoid3Measure, 1e-13);
  EXPECT_NEAR(shape_perimeter(C, ell), kEllipsoid3Perimeter, 1e-11);
}

TEST(ShapeVolumeRule, AgreesWithMeasure) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.5, 0.0}, WeightVector{0.0, 0.0}}) {
    const auto corpus = random_shape_corpus(A, 12, 99);
    for (const auto& s : corpus) {
      const double m = shape_measure(A, s);
      const double q = integrate_weighted([](std::span<const double>) { return 1.0; }, shape_volume_rule(A, s));
      EXPECT_NEAR(q, m, 1e-9 * m) << shape_to_json(A, s).dump();
    }
  }
}

TEST(ShapeMonteCarlo, AgreesWithMeasure) {
  WeightVector A{1.0, 1.0};
  const auto corpus = random_shape_corpus(A, 8, 5);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double m = shape_measure(A, corpus[i]);
    const auto mc = monte_carlo_integrate(A, [](std::span<const double>) { return 1.0; }, corpus[i], 100000, i);
    EXPECT_LE(std::abs(mc.estimate - m), 4.0 * mc.standard_error + 1e-12) << shape_to_json(A, corpus[i]).dump();
  }
}

TEST(IsoperimetricQuotient, SectorBallsAttainTheBound) {
  WeightVector A{1.0, 1.0};
  for (double r : {0.5, 1.0, 3.0}) {
    const auto rep = isoperimetric_quotient(A, sector(r));
    EXPECT_NEAR(rep.quotient, 4.0 * std::pow(0.125, 0.25), 1e-12);
    EXPECT_NEAR(rep.margin, 0.0, 1e-12);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.consistent_with_sector_ball);
  }
}

TEST(IsoperimetricQuotient, UnitBoxAnchor) {
  WeightVector A{1.0, 1.0};
  const auto rep = isoperimetric_quotient(A, Shape{Box{{0.0, 0.0}, {1.0, 1.0}}});
  EXPECT_NEAR(rep.quotient, std::pow(4.0, 0.75), 1e-14);
  EXPECT_NEAR(rep.sharp_constant, 4.0 * std::pow(8.0, -0.25), 1e-14);
  EXPECT_NEAR(rep.margin, std::pow(4.0, 0.75) - 4.0 * std::pow(8.0, -0.25), 1e-14);
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.consistent_with_sector_ball);
}

TEST(IsoperimetricQuotient, FullBallFactor) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.5, 0.0, 2.0}}) {
    const double expect = std::pow(2.0, A.k() / A.D()) * isoperimetric_constant(A);
    const Shape full{SectorBall{1.0}, Containment::symmetric};
    EXPECT_NEAR(isoperimetric_quotient(A, full).quotient, expect, 1e-10 * expect);
    const auto rule_m = integrate_weighted([](std::span<const double>) { return 1.0; },
                                           ball_rule(A, std::vector<double>(A.n(), 0.0), 1.0, 24, true));
    const auto rule_p = integrate_weighted([](std::span<const double>) { return 1.0; },
                                           ball_surface_rule(A, std::vector<double>(A.n(), 0.0), 1.0, 24, true));
    EXPECT_NEAR(rule_p / std::pow(rule_m, (A.D() - 1.0) / A.D()), expect, 1e-5 * expect);
  }
}

TEST(IsoperimetricQuotient, CorpusSatisfiesTheBound) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.5, 2.3}, WeightVector{2.0, 0.0},
                                WeightVector{0.5, 0.0, 1.5}, WeightVector{3.0}}) {
    const auto corpus = random_shape_corpus(A, 200, 7);
    ASSERT_EQ(corpus.size(), 200u);
    for (const auto& s : corpus) {
      const auto rep = isoperimetric_quotient(A, s);
      EXPECT_GE(rep.quotient, rep.sharp_constant - 1e-6) << rep.shape.dump();
    }
  }
}

TEST(IsoperimetricQuotient, ScaleInvariance) {
  WeightVector A{0.5, 2.3};
  for (const auto& s : random_shape_corpus(A, 20, 3)) {
    const double q = isoperimetric_quotient(A, s).quotient;
    for (double lambda : {0.5, 2.0})
      EXPECT_NEAR(isoperimetric_quotient(A, scaled_shape(s, lambda)).quotient, q, 1e-10 * q);
  }
}

TEST(IsoperimetricQuotient, SplittingMonotonicity) {
  WeightVector A{1.0, 0.5};
  std::vector<Shape> shapes{
      {Box{{-0.5, -1.0}, {1.0, 0.7}}, Containment::symmetric},
      {Box{{-1.0, 0.2}, {1.0, 0.9}}, Containment::symmetric},
      {ShiftedBall{1.0, {0.0, 0.0}}, Containment::symmetric},
      {ShiftedBall{0.7, {0.0, 2.0}}, Containment::symmetric},
      {EllipsoidSector{{1.5, 0.5}}, Containment::symmetric},
      {Star2D{{1.0, 0.2, -0.05}}, Containment::symmetric},
  };
  for (const auto& s : shapes) {
    const auto c = splitting_check(A, s);
    EXPECT_TRUE(c.pass) << shape_to_json(A, s).dump() << " whole " << c.whole_quotient << " piece "
                        << c.min_piece_quotient;
    EXPECT_GE(c.pieces, 1u);
  }
  // Equal halves: whole quotient is strictly larger.
  const auto c = splitting_check(A, shapes[1]);
  EXPECT_GT(c.whole_quotient, c.min_piece_quotient + 1e-3);
}

TEST(ShapeJson, RoundTrip) {
  WeightVector A{1.0, 1.0};
  for (const auto& s : random_shape_corpus(A, 8, 1)) {
    const auto j = shape_to_json(A, s);
    EXPECT_EQ(j["n"], 2);
    const Shape back = shape_from_json(j);
    EXPECT_EQ(shape_to_json(A, back), j);
    EXPECT_DOUBLE_EQ(shape_measure(A, back), shape_measure(A, s));
  }
  EXPECT_THROW(shape_from_json(nlohmann::json{{"kind", "torus"}, {"params", nlohmann::json::object()}}),
               InvalidArgument);
}

TEST(ShapeDiameter, Examples) {
  WeightVector A{1.0, 1.0};
  EXPECT_NEAR(shape_diameter(A, sector(1.0)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(shape_diameter(A, Shape{Box{{0.0, 0.0}, {3.0, 4.0}}}), 5.0, 1e-15);
  EXPECT_NEAR(shape_diameter(A, Shape{EllipsoidSector{{2.0, 1.0}}}), std::sqrt(5.0), 1e-4);
  EXPECT_NEAR(shape_diameter(A, Shape{Star2D{{1.0}}}), std::sqrt(2.0), 1e-4);
}

TEST(StarSearch, ConstantProfileIsStationary) {
  WeightVector A{1.0, 1.0};
  const auto res = star_shape_search(A, Star2D{{1.0, 0.0, 0.0}}, 50, 0.1);
  EXPECT_TRUE(res.stationary);
  EXPECT_EQ(res.accepted, 0u);
  EXPECT_NEAR(res.trace.back(), isoperimetric_constant(A), 1e-4);
}

TEST(StarSearch, EllipseLikeProfileConvergesToArc) {
  WeightVector A{1.0, 1.0};
  const auto res = star_shape_search(A, Star2D{{1.0, 0.3}}, 400, 0.5);
  EXPECT_FALSE(res.aborted);
  EXPECT_LT(relative_sup_distance_from_constant(res.profile), 0.02);
  EXPECT_NEAR(res.trace.back(), isoperimetric_constant(A), 1e-3);
  for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_LE(res.trace[i], res.trace[i - 1]);
}

TEST(StarSearch, TraceNonIncreasingFromRandomStarts) {
  WeightVector A{0.5, 2.3};
  std::mt19937_64 rng(4);
  std::vector<Star2D> starts;
  for (int k = 0; k < 3; ++k) {
    Star2D s{{1.0}};
    for (int j = 1; j <= 4; ++j) s.coeffs.push_back(0.15 * (2.0 * uniform01(rng) - 1.0) / j);
    starts.push_back(s);
  }
  const auto results = multi_start_search(A, starts, 60, 0.5, 3);
  ASSERT_EQ(results.size(), 3u);
  for (const auto& res : results) {
    for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_LE(res.trace[i], res.trace[i - 1]);
    EXPECT_GE(res.trace.back(), isoperimetric_constant(A) - 1e-6);
    EXPECT_LT(res.trace.back(), res.trace.front());
  }
}

TEST(StarSearch, RejectsWrongDimension) {
  EXPECT_THROW(star_shape_search(WeightVector{1.0, 1.0, 1.0}, Star2D{{1.0}}, 5, 0.1), InvalidArgument);
}

TEST(WeightedAmGm, Examples) {
  auto r = weighted_amgm({1.0, 1.0}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(r.gm, 1.0);
  EXPECT_DOUBLE_EQ(r.am, 1.0);
  r = weighted_amgm({2.0, 8.0}, {1.0, 1.0});
  EXPECT_NEAR(r.gm, 16.0, 1e-13);
  EXPECT_NEAR(r.am, 25.0, 1e-13);
  r = weighted_amgm({3.0, 3.0, 3.0}, {0.5, 1.5, 2.0});
  EXPECT_NEAR(r.gm, std::pow(3.0, 4.0), 1e-12);
  EXPECT_NEAR(r.am, std::pow(3.0, 4.0), 1e-12);
  r = weighted_amgm({0.0, 2.0}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(r.gm, 2.0);
  EXPECT_THROW(weighted_amgm({1.0}, {0.0}), InvalidArgument);
}

TEST(WeightedAmGm, RandomInequality) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 5);
    std::vector<double> w(m), l(m);
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = 3.0 * uniform01(rng);
      l[i] = uniform01(rng) < 0.2 ? 0.0 : 2.0 * uniform01(rng);
    }
    l[0] += 0.1;
    const auto r = weighted_amgm(w, l);
    EXPECT_LE(r.gm, r.am * (1.0 + 1e-12));
    // Equality iff all w_i with l_i > 0 coincide.
    for (std::size_t i = 0; i < m; ++i)
      if (l[i] > 0.0) w[i] = 1.7;
    const auto e = weighted_amgm(w, l);
    EXPECT_NEAR(e.gm, e.am, 1e-12 * e.am);
  }
}
