#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monoweight/inequalities.hpp"

using namespace monoweight;

namespace {

struct WeightCase {
  WeightVector A;
  double p;
};

// Sobolev test matrix: n <= 3, p in {1, 1.5, 2, (D+1)/2} when below D.
std::vector<double> exponent_matrix(const WeightVector& A) {
  std::vector<double> ps;
  for (double p : {1.0, 1.5, 2.0, (A.D() + 1.0) / 2.0})
    if (p < A.D() && std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
  return ps;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sobolev.

TEST(ExtremalFunction, AttainsSharpConstant) {
  for (const auto& [A, p] : {WeightCase{WeightVector{1.0, 1.0}, 2.0}, WeightCase{WeightVector::zero(3), 2.0},
                             WeightCase{WeightVector{2.0, 0.0}, 1.5}}) {
    const TestFunction u = extremal_function(A, p, 1.0, 1.0);
    const VerificationReport r = sobolev_report(A, p, u);
    const double q = r.details["quotient"].get<double>();
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.flags.empty());
    EXPECT_LE(q, sobolev_constant(A, p));
    EXPECT_NEAR(q, sobolev_constant(A, p), 1e-3) << u.descriptor;
  }
}

TEST(ExtremalFunction, ValueAndGradient) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = extremal_function(A, 2.0, 1.0, 1.0);
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_DOUBLE_EQ(u.value(origin), 1.0);
  std::mt19937_64 rng(3);
  std::vector<double> x(2), g(2), fd(2);
  for (int k = 0; k < 100; ++k) {
    for (double& c : x) c = 4.0 * uniform01(rng);
    u.grad(x, g);
    u.central_difference_gradient(x, fd);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(g[i], fd[i], 1e-6) << x[0] << "," << x[1];
  }
}

TEST(ExtremalFunction, QuotientIndependentOfScaleParameters) {
  WeightVector A{1.0, 1.0};
  const double ref = sobolev_quotient(A, 2.0, extremal_function(A, 2.0, 1.0, 1.0));
  for (auto [a, b] : {std::pair{2.0, 5.0}, std::pair{0.5, 3.0}})
    EXPECT_NEAR(sobolev_quotient(A, 2.0, extremal_function(A, 2.0, a, b)), ref, 1e-6);
}

TEST(ExtremalFunction, RejectsPOne) {
  EXPECT_THROW(extremal_function(WeightVector{1.0, 1.0}, 1.0, 1.0, 1.0), ExponentOutOfRange);
  EXPECT_THROW(extremal_function(WeightVector{1.0, 1.0}, 4.0, 1.0, 1.0), CriticalRegime);
  EXPECT_THROW(extremal_function(WeightVector{1.0, 1.0}, 2.0, 0.0, 1.0), InvalidArgument);
}

TEST(SobolevQuotient, HomogeneousAndDilationInvariant) {
  WeightVector A{1.0, 0.5};
  const TestFunction u = bump({0.7, 1.1}, 0.9);
  const double q = sobolev_quotient(A, 1.5, u);
  EXPECT_NEAR(sobolev_quotient(A, 1.5, scaled(u, 5.0)), q, 1e-12);
  for (double lambda : {0.5, 2.0}) EXPECT_NEAR(sobolev_quotient(A, 1.5, dilated(u, lambda)), q, 1e-10);
}

TEST(SobolevQuotient, OffCenterBumpHasPositiveMargin) {
  WeightVector A{1.0, 1.0};
  const VerificationReport r = sobolev_report(A, 2.0, bump({2.0, 2.0}, 1.0));
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.details["quotient_margin"].get<double>(), 0.0);
  EXPECT_GT(r.margin, 0.0);
}

TEST(SobolevQuotient, ZeroFunctionRejected) {
  EXPECT_THROW(sobolev_quotient(WeightVector{1.0, 1.0}, 2.0, scaled(bump({1.0, 1.0}, 0.5), 0.0)), InvalidArgument);
}

TEST(SobolevQuotient, CorpusNeverExceedsSharpConstant) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.0, 0.0}, WeightVector{2.0, 0.0},
                                WeightVector{0.5}, WeightVector{1.0, 0.0, 0.5}, WeightVector::zero(3)}) {
    const auto ps = exponent_matrix(A);
    for (const CorpusItem& item : random_bump_corpus(A, 100, 2024)) {
      const TestFunction u = make_test_function(A, 2.0, item);
      const SampledFunction s = sample_function(u, function_rule(A, u));
      for (double p : ps) {
        const double q = s.norm(critical_exponent(A, p)) / s.gradient_norm(p);
        EXPECT_LE(q, sobolev_constant(A, p) + 1e-3) << "D=" << A.D() << " p=" << p << " " << u.descriptor;
      }
    }
  }
}

TEST(SobolevQuotient, PlateausApproachIsoperimetricLimitFromBelow) {
  // p = 1: smoothed indicators of B_1^* approach 1/C_1 without reaching it.
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{2.0, 0.0}}) {
    const double limit = sobolev_constant(A, 1.0);
    double prev = 0.0;
    for (double band : {0.2, 0.1, 0.05, 0.025}) {
      const double q = sobolev_quotient(A, 1.0, plateau(A.n(), 1.0, band));
      EXPECT_LT(q, limit);
      EXPECT_GT(q, prev);
      prev = q;
    }
    EXPECT_GT(prev, 0.98 * limit);
  }
}

TEST(SobolevQuotient, RearrangementDoesNotDecreaseQuotient) {
  WeightVector A{1.0, 1.0};
  for (const CorpusItem& item : off_center_bump_corpus(A, 4, 9)) {
    const TestFunction u = make_test_function(A, 2.0, item);
    const RadialProfile prof = rearrange(A, u);
    for (double p : {1.5, 2.0})
      EXPECT_GE(profile_sobolev_quotient(A, p, prof), sobolev_quotient(A, p, u) - 5e-3) << u.descriptor;
  }
}

TEST(VerificationReport, JsonCarriesProvenance) {
  const VerificationReport r = sobolev_report(WeightVector{1.0, 1.0}, 2.0, bump({1.0, 1.0}, 0.5));
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["inequality_id"], "sobolev");
  EXPECT_EQ(j["constant_provenance"], "closed_form");
  EXPECT_DOUBLE_EQ(j["margin"].get<double>(), r.rhs - r.lhs);
  EXPECT_EQ(j["pass"], r.pass);
}

// ---------------------------------------------------------------------------
// Morrey.

TEST(Morrey, RatioIsDilationInvariant) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({0.4, 0.9}, 1.1, 3);
  const double ref = morrey_ratio(A, 6.0, u, morrey_pairs(A, u));
  for (double lambda : {0.5, 2.0}) {
    const TestFunction v = dilated(u, lambda);
    EXPECT_NEAR(morrey_ratio(A, 6.0, v, morrey_pairs(A, v)), ref, 1e-6 * ref);
  }
}

TEST(Morrey, ZeroFunctionHasZeroLeftSide) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = scaled(bump({1.0, 1.0}, 0.5), 0.0);
  const VerificationReport r = morrey_check(A, 6.0, u, morrey_pairs(A, u), 1.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Morrey, RejectsNonSupercriticalExponent) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({1.0, 1.0}, 0.5);
  EXPECT_THROW(morrey_check(A, 4.0, u, morrey_pairs(A, u), 1.0), ExponentOutOfRange);
}

TEST(Morrey, EnvelopeIsFiniteAndStableAcrossCorpora) {
  WeightVector A{1.0, 1.0};
  const auto first = random_bump_corpus(A, 50, 101), second = random_bump_corpus(A, 50, 202);
  const Envelope e1 = morrey_envelope(A, 6.0, first), e2 = morrey_envelope(A, 6.0, second);
  ASSERT_TRUE(std::isfinite(e1.constant));
  EXPECT_GT(e1.max_ratio, 0.0);
  EXPECT_NEAR(e2.max_ratio / e1.max_ratio, 1.0, 0.1);
  for (const CorpusItem& item : second) {
    const TestFunction u = make_test_function(A, 6.0, item);
    EXPECT_TRUE(morrey_check(A, 6.0, u, morrey_pairs(A, u, 256, item.seed), e1.constant).pass) << u.descriptor;
  }
}

TEST(MorreyPotential, RadialReductionOracle) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({0.0, 0.0}, 1.0, 3);
  for (double t : {0.3, 0.7}) {
    const std::vector<double> y{t / std::sqrt(2.0), t / std::sqrt(2.0)};
    const PotentialBound b = morrey_potential_bound(A, u, y);
    EXPECT_TRUE(b.converged);
    EXPECT_NEAR(b.lhs, std::abs(u.radial->g(t) - u.radial->g(0.0)), 1e-14);
    const double oracle = ball_perimeter(A) * weighted_ray_integral(
                                                  1.0, [&](double r) { return std::abs(u.radial->dg(r)); },
                                                  RadialTail::compact(2.0 * t, {1.0}));
    EXPECT_NEAR(b.rhs_integral, oracle, 1e-8 * oracle) << t;
  }
}

TEST(MorreyPotential, ConstantNearOriginGivesZero) {
  WeightVector A{1.0, 0.5};
  const PotentialBound b = morrey_potential_bound(A, plateau(2, 1.0, 0.3), std::vector<double>{0.2, 0.3});
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_EQ(b.rhs_integral, 0.0);
}

TEST(MorreyPotential, RatioBoundedOverCorpus) {
  WeightVector A{1.0, 1.0};
  double worst = 0.0;
  std::mt19937_64 rng(4);
  for (const CorpusItem& item : random_bump_corpus(A, 20, 31)) {
    const TestFunction u = make_test_function(A, 6.0, item);
    for (int k = 0; k < 3; ++k) {
      const std::vector<double> y{0.05 + 2.0 * uniform01(rng), 0.05 + 2.0 * uniform01(rng)};
      const PotentialBound b = morrey_potential_bound(A, u, y);
      EXPECT_TRUE(b.converged) << b.self_convergence;
      if (b.lhs > 0.0) worst = std::max(worst, b.lhs / b.rhs_integral);
    }
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_GT(worst, 0.0);
  // Radial decreasing functions give exactly 1/P; the corpus stays of that order.
  EXPECT_LT(worst, 10.0 / ball_perimeter(A));
}

TEST(MorreyChaining, RouteThroughMinimumWithinTwiceDirect) {
  WeightVector A{1.0, 1.0};
  std::mt19937_64 rng(8);
  for (const CorpusItem& item : random_bump_corpus(A, 10, 77)) {
    const TestFunction u = make_test_function(A, 6.0, item);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> y(2), z(2);
      for (std::size_t i = 0; i < 2; ++i) {
        y[i] = u.center[i] + u.support_radius * (2.0 * uniform01(rng) - 1.0);
        z[i] = u.center[i] + u.support_radius * (2.0 * uniform01(rng) - 1.0);
        y[i] = std::max(y[i], 0.0);
        z[i] = std::max(z[i], 0.0);
      }
      const ChainedHolder c = chained_holder(A, 6.0, u, y, z);
      const double dyw = distance(y, c.w), dwz = distance(c.w, z), dyz = distance(y, z);
      EXPECT_NEAR(dyw * dyw + dwz * dwz, dyz * dyz, 1e-12);
      EXPECT_GE(c.chained, c.direct - 1e-14);
      EXPECT_LE(c.chained, 2.0 * std::max(c.leg_yw, c.leg_wz) + 1e-14);
    }
  }
}

TEST(SupBound, ZeroFunction) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = scaled(bump({1.0, 1.0}, 0.5), 0.0);
  const VerificationReport r = sup_bound_check(A, 6.0, u, enclosing_sector_ball(u), 1.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(SupBound, InflatedDomainWidensMargin) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({1.0, 1.0}, 0.5);
  const Shape small = enclosing_sector_ball(u);
  const Shape big = scaled_shape(small, 2.0);
  const VerificationReport a = sup_bound_check(A, 6.0, u, small, 1.0), b = sup_bound_check(A, 6.0, u, big, 1.0);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_GE(b.rhs, std::pow(2.0, holder_exponent(A, 6.0)) * a.rhs * (1.0 - 1e-12));
  EXPECT_GT(b.margin, a.margin);
}

TEST(SupBound, CorpusBelowMorreyEnvelope) {
  WeightVector A{1.0, 1.0};
  const auto corpus = random_bump_corpus(A, 30, 55);
  const Envelope e = morrey_envelope(A, 6.0, corpus);
  for (const CorpusItem& item : corpus) {
    const TestFunction u = make_test_function(A, 6.0, item);
    const double s = sup_ratio(A, 6.0, u);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_TRUE(sup_bound_check(A, 6.0, u, enclosing_sector_ball(u), e.constant).pass) << u.descriptor;
  }
}

TEST(SupBound, RejectsFunctionLeavingDomain) {
  WeightVector A{1.0, 1.0};
  EXPECT_THROW(sup_bound_check(A, 6.0, bump({1.0, 1.0}, 0.5), Shape{SectorBall{1.2}}, 1.0), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Trudinger.

TEST(Trudinger, GrowthRatioGridHasFiniteMaximum) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.0, 0.0}, WeightVector{2.0, 0.0, 0.5}}) {
    const double c0 = cp_growth_envelope(A);
    EXPECT_TRUE(std::isfinite(c0));
    for (double p : linear_grid(1.1, A.D() - 0.01, 50)) EXPECT_LE(cp_growth_ratio(A, p), c0 * (1.0 + 1e-12));
  }
}

TEST(Trudinger, AdmissibleC1SatisfiesSeriesCriterion) {
  WeightVector A{1.0, 1.0};
  const double c1 = admissible_trudinger_c1(A);
  EXPECT_NEAR(trudinger_series_ratio(A, c1), kSeriesFraction / std::numbers::e, 1e-14);
  EXPECT_TRUE(std::isfinite(trudinger_series_bound(A, c1)));
  EXPECT_THROW(trudinger_series_bound(A, 1.01 * admissible_trudinger_c1(A, 1.0 - 1e-12)), InvalidArgument);
}

TEST(Trudinger, TinySupportGivesFunctionalNearOne) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({2.0, 2.0}, 0.05);
  const double f = trudinger_functional(A, u, Shape{SectorBall{10.0}}, admissible_trudinger_c1(A));
  EXPECT_GE(f, 1.0);
  EXPECT_NEAR(f, 1.0, 1e-3);
}

TEST(Trudinger, InvariantUnderScaling) {
  WeightVector A{1.0, 0.5};
  const TestFunction u = bump({0.8, 0.6}, 0.7);
  const Shape omega = enclosing_sector_ball(u);
  const double c1 = admissible_trudinger_c1(A);
  const double f = trudinger_functional(A, u, omega, c1);
  for (double lambda : {0.1, 7.0}) EXPECT_NEAR(trudinger_functional(A, scaled(u, lambda), omega, c1), f, 1e-12 * f);
}

TEST(Trudinger, RejectsNonPositiveC1) {
  WeightVector A{1.0, 1.0};
  const TestFunction u = bump({1.0, 1.0}, 0.5);
  EXPECT_THROW(trudinger_functional(A, u, enclosing_sector_ball(u), 0.0), InvalidArgument);
}

TEST(Trudinger, CorpusBelowEnvelopeAndSeriesBound) {
  WeightVector A{1.0, 1.0};
  const double c1 = admissible_trudinger_c1(A);
  const double series = trudinger_series_bound(A, c1);
  auto values = [&](std::uint64_t seed) {
    std::vector<double> v;
    for (const CorpusItem& item : random_bump_corpus(A, 50, seed)) {
      const TestFunction u = make_test_function(A, A.D(), item);
      v.push_back(trudinger_functional(A, u, enclosing_sector_ball(u), c1));
    }
    return v;
  };
  const Envelope e = envelope_from(values(5));
  EXPECT_LE(e.max_ratio, series);
  for (double f : values(6)) {
    EXPECT_LE(f, e.constant);
    EXPECT_LE(f, series);
  }
}

TEST(Trudinger, LargerExponentBlowsUpOnLogFamily) {
  for (const WeightVector& A : {WeightVector{1.0, 1.0}, WeightVector{0.0, 0.0, 0.0}}) {
    const double D = A.D(), gamma = trudinger_exponent(A), c1 = admissible_trudinger_c1(A);
    const double log_bound = std::log(trudinger_series_bound(A, c1));
    // Beyond L* the 5% larger exponent outgrows the measure decay e^{-D L}.
    const double kappa = std::pow(c1 * std::pow(ball_perimeter(A), -1.0 / D), 1.05 * gamma);
    const double L_star = std::pow(D / kappa, 1.0 / 0.05);
    double prev = -1.0;
    for (double m : {2.0, 4.0, 8.0}) {
      const double blown = moser_log_functional(A, c1, 1.05 * gamma, m * L_star);
      EXPECT_GT(blown, prev);
      EXPECT_GT(blown, log_bound);
      prev = blown;
      EXPECT_LE(moser_log_functional(A, c1, gamma, m * L_star), log_bound);
    }
    EXPECT_GT(prev, 1e6);
  }
}

// ---------------------------------------------------------------------------
// Change of variables.

TEST(ChangeOfVariables, ZeroAlphaIsUnweightedSobolev) {
  const ChangeOfVariables cv({0.0, 0.0, 0.0});
  EXPECT_EQ(cv.D(), 3.0);
  EXPECT_EQ(cv.jacobian, 1.0);
  EXPECT_DOUBLE_EQ(cv.constant(2.0), sobolev_constant(WeightVector::zero(3), 2.0));
  const VerificationReport r = cov_verify({0.0, 0.0, 0.0}, 2.0, bump({0.3, -0.2, 0.1}, 0.8));
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.flags.empty());
}

TEST(ChangeOfVariables, HalfExponentsMatchWeightedPipeline) {
  const std::vector<double> alpha{0.5, 0.5};
  const ChangeOfVariables cv(alpha);
  EXPECT_EQ(cv.A, (WeightVector{1.0, 1.0}));
  EXPECT_DOUBLE_EQ(cv.D(), 4.0);
  for (const CorpusItem& item : random_bump_corpus(cv.A, 20, 13)) {
    const TestFunction u = make_test_function(cv.A, 2.0, item);
    const CovSides a = cov_sides_direct(cv, 2.0, u), b = cov_sides_pullback(cv, 2.0, u);
    EXPECT_NEAR(a.lhs, b.lhs, 1e-3 * a.lhs);
    EXPECT_NEAR(a.energy, b.energy, 1e-3 * a.energy);
    const VerificationReport r = cov_verify(alpha, 2.0, u);
    EXPECT_TRUE(r.pass) << u.descriptor;
    EXPECT_TRUE(r.flags.empty());
  }
}

TEST(ChangeOfVariables, RatioInvariantUnderScaling) {
  const std::vector<double> alpha{0.3, 0.6};
  const TestFunction u = bump({0.9, 0.4}, 0.6);
  const VerificationReport a = cov_verify(alpha, 1.8, u), b = cov_verify(alpha, 1.8, scaled(u, 4.0));
  EXPECT_NEAR(a.lhs / a.rhs, b.lhs / b.rhs, 1e-12);
}

TEST(ChangeOfVariables, RejectsAlphaOutsideRange) {
  const TestFunction u = bump({1.0, 1.0}, 0.5);
  EXPECT_THROW(cov_verify({1.0, 0.0}, 1.5, u), InvalidArgument);
  EXPECT_THROW(cov_verify({-0.1, 0.0}, 1.5, u), InvalidArgument);
  EXPECT_THROW(cov_verify({0.0, 0.0}, 2.0, u), CriticalRegime);
}
