#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "monoweight/errors.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

/// Uniform double in [0, 1) with 53 random bits. Bit-identical on every
/// platform for a given mt19937_64 state (unlike uniform_real_distribution).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double acceptance = 0.0;
  std::size_t samples = 0;
};

inline constexpr double kMinimumAcceptance = 1e-3;

/// Per-axis sampler with density proportional to |x|^a on [lo, hi]
/// (inverse CDF t^{1/(a+1)}).
class MonomialAxisSampler {
 public:
  MonomialAxisSampler(double a, double lo, double hi) : a1_(a + 1.0), lo_(lo), hi_(hi) {
    if (!(hi > lo)) throw InvalidArgument("empty sampling interval");
    if (lo >= 0.0) {
      lower_ = std::pow(lo, a1_);
      pos_ = std::pow(hi, a1_) - lower_;
    } else if (hi <= 0.0) {
      lower_ = std::pow(-hi, a1_);
      neg_ = std::pow(-lo, a1_) - lower_;
    } else {
      pos_ = std::pow(hi, a1_);
      neg_ = std::pow(-lo, a1_);
    }
  }

  /// int_lo^hi |x|^a dx.
  double mass() const { return (pos_ + neg_) / a1_; }

  double sample(double u) const {
    const double v = u * (pos_ + neg_);
    if (v < pos_) return std::pow(lower_ * (lo_ >= 0.0 ? 1.0 : 0.0) + v, 1.0 / a1_);
    return -std::pow(lower_ * (hi_ <= 0.0 ? 1.0 : 0.0) + (v - pos_), 1.0 / a1_);
  }

 private:
  double a1_;
  double lo_, hi_;
  double lower_ = 0.0;
  double pos_ = 0.0;
  double neg_ = 0.0;
};

/// Importance-sampled estimate of int_{region} f |x|^A dx where region is
/// given by a membership test inside the box [lo, hi]. Points are drawn with
/// density proportional to |x|^A on the box and rejected outside the region.
inline MonteCarloEstimate monte_carlo_integrate(const WeightVector& A,
                                                const std::function<double(std::span<const double>)>& f,
                                                std::span<const double> lo, std::span<const double> hi,
                                                const std::function<bool(std::span<const double>)>& contains,
                                                std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw InvalidArgument("Monte Carlo needs at least 10^3 samples");
  const std::size_t n = A.n();
  std::vector<MonomialAxisSampler> axes;
  double box_mass = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    axes.emplace_back(A[i], lo[i], hi[i]);
    box_mass *= axes.back().mass();
  }
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) x[i] = axes[i].sample(uniform01(rng));
    if (!contains(x)) continue;
    ++hits;
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalFailure("Monte Carlo integrand is not finite");
    sum += v;
    sum_sq += v * v;
  }
  const double N = static_cast<double>(samples);
  MonteCarloEstimate out;
  out.samples = samples;
  out.acceptance = static_cast<double>(hits) / N;
  if (out.acceptance < kMinimumAcceptance)
    throw NumericalFailure("Monte Carlo acceptance rate " + std::to_string(out.acceptance) +
                           " is below 1e-3; use a tighter bounding box");
  const double mean = sum / N;
  const double var = std::max(0.0, sum_sq / N - mean * mean);
  out.estimate = box_mass * mean;
  out.standard_error = box_mass * std::sqrt(var / (N - 1.0));
  return out;
}

}  // namespace monoweight
