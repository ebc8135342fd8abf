#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/monte_carlo.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/radial.hpp"
#include "monoweight/rearrangement.hpp"
#include "monoweight/rule.hpp"
#include "monoweight/shape.hpp"
#include "monoweight/test_function.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

// ---------------------------------------------------------------------------
// Reports.

enum class Provenance { closed_form, empirical };

inline const char* to_string(Provenance p) { return p == Provenance::closed_form ? "closed_form" : "empirical"; }

/// One certified inequality instance. pass <=> margin >= -tolerance.
struct VerificationReport {
  std::string inequality_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant_used = 0.0;
  Provenance provenance = Provenance::closed_form;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string function_descriptor;
  nlohmann::json discretization = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  /// Numerical warnings (backend mismatch, unconverged singular quadrature).
  std::vector<std::string> flags;
};

inline VerificationReport make_report(std::string id, double lhs, double rhs, double constant, Provenance prov,
                                      double tolerance, std::string descriptor) {
  VerificationReport r;
  r.inequality_id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant_used = constant;
  r.provenance = prov;
  r.margin = rhs - lhs;
  r.tolerance = tolerance;
  r.pass = r.margin >= -tolerance;
  r.function_descriptor = std::move(descriptor);
  return r;
}

inline nlohmann::json to_json(const VerificationReport& r) {
  return {{"inequality_id", r.inequality_id},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"constant_used", r.constant_used},
          {"constant_provenance", to_string(r.provenance)},
          {"margin", r.margin},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"function", r.function_descriptor},
          {"discretization", r.discretization},
          {"details", r.details},
          {"flags", r.flags}};
}

// ---------------------------------------------------------------------------
// Norms.

enum class NormBackend { automatic, radial, tensor };

inline constexpr std::size_t kTensorOrder = 8;
inline constexpr std::size_t kGradedOrder = 12;
inline constexpr double kBackendMismatch = 1e-4;
inline constexpr std::size_t kCrossCheckBudget = 4'000'000;

namespace detail {

inline std::size_t default_panels(std::size_t n) { return n == 1 ? 64 : n == 2 ? 16 : 8; }

inline bool centred_radial(const TestFunction& u) {
  return u.radial && std::all_of(u.center.begin(), u.center.end(), [](double c) { return c == 0.0; });
}

// Geometric breaks resolving a radial function with a long tail.
inline std::vector<double> radial_axis_breaks(const TestFunction& u) {
  double first = u.support_radius / 64.0;
  for (double b : u.radial->breakpoints)
    if (b > 0.0) first = std::min(first, b / 8.0);
  return graded_breaks(u.support_radius, first, 1.5);
}

inline std::vector<double> mirrored(const std::vector<double>& b) {
  std::vector<double> out;
  for (auto it = b.rbegin(); it != b.rend(); ++it)
    if (*it > 0.0) out.push_back(-*it);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline std::size_t graded_rule_size(const WeightVector& A, const TestFunction& u, std::size_t order) {
  const auto b = radial_axis_breaks(u);
  std::size_t total = 1;
  for (std::size_t i = 0; i < A.n(); ++i) total *= order * (A.positive(i) ? b.size() - 1 : 2 * (b.size() - 1));
  return total;
}

}  // namespace detail

/// Tensor rule covering supp u in the closed orthant. Origin-centred radial
/// functions get geometric panels (long tails); the rest equal panels.
inline QuadratureRule function_rule(const WeightVector& A, const TestFunction& u, std::size_t order = 0,
                                    std::size_t panels = 0) {
  if (u.dim != A.n()) throw InvalidArgument("test function dimension does not match weight");
  if (detail::centred_radial(u)) {
    const auto b = detail::radial_axis_breaks(u);
    std::vector<std::vector<double>> breaks;
    for (std::size_t i = 0; i < A.n(); ++i) breaks.push_back(A.positive(i) ? b : detail::mirrored(b));
    return breakpoint_rule(A, breaks, order ? order : kGradedOrder);
  }
  return support_rule(A, u, order ? order : kTensorOrder, panels ? panels : detail::default_panels(A.n()));
}

/// |u| and |grad u| tabulated on a rule; any L^q norm is then a weighted sum.
struct SampledFunction {
  std::vector<double> weights;
  std::vector<double> values;
  std::vector<double> grad_norms;
  std::size_t order = 0;

  static double power_sum(const std::vector<double>& w, const std::vector<double>& v, double q) {
    std::vector<double> t(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i] > 0.0 ? w[i] * std::pow(v[i], q) : 0.0;
    return pairwise_sum(t);
  }
  double integral_power(double q) const { return power_sum(weights, values, q); }
  double gradient_integral_power(double q) const { return power_sum(weights, grad_norms, q); }
  double norm(double q) const { return std::pow(integral_power(q), 1.0 / q); }
  double gradient_norm(double q) const { return std::pow(gradient_integral_power(q), 1.0 / q); }
};

inline SampledFunction sample_function(const TestFunction& u, const QuadratureRule& rule) {
  SampledFunction s;
  s.weights = rule.weights;
  s.order = rule.order;
  s.values.resize(rule.size());
  s.grad_norms.resize(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    s.values[i] = std::abs(u.value(x));
    s.grad_norms[i] = u.grad_norm(x);
    if (!std::isfinite(s.values[i]) || !std::isfinite(s.grad_norms[i]))
      throw NumericalFailure("test function is not finite at " + format_point(x));
  }
  return s;
}

/// int g(|x|)^q x^A and int |g'(|x|)|^q x^A by radial reduction.
inline double radial_power_integral(const WeightVector& A, const TestFunction& u, double q, bool gradient) {
  if (!detail::centred_radial(u)) throw InvalidArgument("radial backend needs a radial function centred at 0");
  const auto& rf = *u.radial;
  auto h = [&](double r) {
    const double v = std::abs(gradient ? rf.dg(r) : rf.g(r));
    return v > 0.0 ? std::pow(v, q) : 0.0;
  };
  return radial_integrate(A, h, RadialTail::compact(u.support_radius, rf.breakpoints));
}

/// ||u||_{L^a(x^A)} and ||grad u||_{L^b(x^A)} from one backend.
struct NormPair {
  double u_norm = 0.0;
  double grad_norm = 0.0;
  NormBackend backend = NormBackend::tensor;
  nlohmann::json discretization;
};

inline NormPair norm_pair(const WeightVector& A, const TestFunction& u, double a, double b,
                          NormBackend backend = NormBackend::automatic) {
  if (backend == NormBackend::automatic)
    backend = detail::centred_radial(u) ? NormBackend::radial : NormBackend::tensor;
  NormPair out;
  out.backend = backend;
  if (backend == NormBackend::radial) {
    out.u_norm = std::pow(radial_power_integral(A, u, a, false), 1.0 / a);
    out.grad_norm = std::pow(radial_power_integral(A, u, b, true), 1.0 / b);
    out.discretization = {{"backend", "radial"}, {"method", "adaptive_gauss_kronrod_15"}, {"tol", kRadialTolerance}};
    return out;
  }
  const QuadratureRule rule = function_rule(A, u);
  const SampledFunction s = sample_function(u, rule);
  out.u_norm = s.norm(a);
  out.grad_norm = s.gradient_norm(b);
  out.discretization = {{"backend", "tensor"}, {"order", rule.order}, {"nodes", rule.size()}};
  return out;
}

// ---------------------------------------------------------------------------
// Sobolev.

inline constexpr double kSobolevTolerance = 1e-3;

/// ||u||_{L^{p_*}(x^A)} / ||grad u||_{L^p(x^A)}, 1 <= p < D.
inline double sobolev_quotient(const WeightVector& A, double p, const TestFunction& u,
                               NormBackend backend = NormBackend::automatic) {
  const double ps = critical_exponent(A, p);
  const NormPair np = norm_pair(A, u, ps, p, backend);
  if (!(np.grad_norm > 0.0)) throw InvalidArgument("gradient norm vanishes: quotient undefined");
  return np.u_norm / np.grad_norm;
}

/// Quotient of a rearranged profile, with |grad u_*| from profile slopes.
inline double profile_sobolev_quotient(const WeightVector& A, double p, const RadialProfile& prof) {
  const double ps = critical_exponent(A, p);
  const double num = profile_integral(A, prof, [ps](double v) { return std::pow(std::abs(v), ps); });
  const double den = profile_gradient_integral(A, prof, [p](double s) { return std::pow(s, p); });
  if (!(den > 0.0)) throw InvalidArgument("gradient norm vanishes: quotient undefined");
  return std::pow(num, 1.0 / ps) / std::pow(den, 1.0 / p);
}

/// ||u||_{p_*} <= C_p ||grad u||_p with C_p closed form. A radial function is
/// evaluated by both backends when the tensor rule fits the budget; relative
/// disagreement above 1e-4 raises the "backend_mismatch" flag.
inline VerificationReport sobolev_report(const WeightVector& A, double p, const TestFunction& u,
                                         double tolerance = kSobolevTolerance,
                                         std::size_t cross_check_budget = kCrossCheckBudget) {
  const double ps = critical_exponent(A, p);
  const double C = sobolev_constant(A, p);
  const NormPair np = norm_pair(A, u, ps, p);
  if (!(np.grad_norm > 0.0)) throw InvalidArgument("gradient norm vanishes: quotient undefined");
  const double q = np.u_norm / np.grad_norm;
  VerificationReport r = make_report("sobolev", np.u_norm, C * np.grad_norm, C, Provenance::closed_form,
                                     tolerance * np.grad_norm, u.descriptor);
  r.discretization = np.discretization;
  r.details = {{"p", p}, {"p_star", ps}, {"quotient", q}, {"quotient_margin", C - q}};
  if (np.backend == NormBackend::radial) {
    if (detail::graded_rule_size(A, u, kGradedOrder) <= cross_check_budget) {
      const double qt = sobolev_quotient(A, p, u, NormBackend::tensor);
      const double rel = std::abs(qt - q) / q;
      r.details["tensor_quotient"] = qt;
      r.details["backend_relative_difference"] = rel;
      if (rel > kBackendMismatch) r.flags.push_back("backend_mismatch");
    } else {
      r.details["tensor_cross_check"] = "skipped: rule exceeds node budget";
    }
  }
  return r;
}

namespace detail {

// int_0^inf r^{D-1} (a + b r^{p'})^{-D} dr = a^{-D} (a/b)^{D/p'} B(D/p', D/p) / p'.
inline double extremal_pstar_mass(double D, double p, double a, double b) {
  const double pc = p / (p - 1.0);
  return std::exp(-D * std::log(a) + (D / pc) * std::log(a / b) + log_beta(D / pc, D / p)) / pc;
}

}  // namespace detail

inline constexpr double kExtremalTailMass = 1e-8;

/// u_{a,b}(x) = (a + b|x|^{p'})^{1-D/p} times a C^1 cutoff equal to 1 on
/// |x| <= R and 0 beyond 2R. R makes the relative p_*-mass beyond R smaller
/// than 1e-8, using (a + b r^{p'})^{-D} <= b^{-D} r^{-p'D}.
inline TestFunction extremal_function(const WeightVector& A, double p, double a, double b) {
  const double D = A.D();
  if (p == 1.0) throw ExponentOutOfRange("p = 1 has no extremal function: the constant is not attained");
  if (!(p > 1.0)) throw ExponentOutOfRange("extremal function needs p > 1");
  if (p >= D) throw CriticalRegime(p, D);
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("extremal function needs a > 0 and b > 0");
  const double pc = p / (p - 1.0);
  const double scale = std::pow(a / b, 1.0 / pc);
  const double mass = detail::extremal_pstar_mass(D, p, a, b);
  // tail(R) <= b^{-D} R^{-D/(p-1)} (p-1)/D.
  const double log_R = (p - 1.0) / D * (std::log((p - 1.0) / D) - D * std::log(b) - std::log(kExtremalTailMass * mass));
  const double R = std::max(std::exp(log_R), 4.0 * scale);
  auto phi = [=](double r) { return std::pow(a + b * std::pow(r, pc), 1.0 - D / p); };
  auto dphi = [=](double r) {
    return r > 0.0 ? (1.0 - D / p) * std::pow(a + b * std::pow(r, pc), -D / p) * b * pc * std::pow(r, pc - 1.0) : 0.0;
  };
  auto g = [=](double r) { return r >= 2.0 * R ? 0.0 : phi(r) * smooth_step_down((r - R) / R); };
  auto dg = [=](double r) {
    if (r >= 2.0 * R) return 0.0;
    const double s = (r - R) / R;
    return dphi(r) * smooth_step_down(s) + phi(r) * smooth_step_down_derivative(s) / R;
  };
  std::vector<double> breaks;
  for (double x = scale; x < R; x *= 4.0) breaks.push_back(x);
  breaks.push_back(R);
  breaks.push_back(2.0 * R);
  TestFunction u = radial_function(A.n(), g, dg, 2.0 * R, breaks,
                                   "extremal(a=" + std::to_string(a) + ",b=" + std::to_string(b) +
                                       ",p=" + std::to_string(p) + ",R=" + std::to_string(R) + ")");
  u.max_abs = std::pow(a, 1.0 - D / p);
  u.argmax.assign(A.n(), 0.0);
  return u;
}

// ---------------------------------------------------------------------------
// Corpora.

/// A corpus entry {type: bump|extremal|plateau, params, seed}.
struct CorpusItem {
  std::string type;
  nlohmann::json params;
  std::uint64_t seed = 0;
};

inline nlohmann::json corpus_item_json(const WeightVector& A, double p, const CorpusItem& item) {
  return {{"type", item.type},
          {"params", item.params},
          {"A", std::vector<double>(A.exponents().begin(), A.exponents().end())},
          {"p", p},
          {"seed", item.seed}};
}

inline CorpusItem corpus_item_from_json(const nlohmann::json& j) {
  return CorpusItem{j.at("type").get<std::string>(), j.at("params"), j.value("seed", std::uint64_t{0})};
}

inline TestFunction make_test_function(const WeightVector& A, double p, const CorpusItem& item) {
  const auto& q = item.params;
  if (item.type == "bump") {
    auto c = q.at("center").get<std::vector<double>>();
    if (c.size() != A.n()) throw InvalidArgument("bump centre does not match weight dimension");
    return bump(std::move(c), q.at("radius").get<double>(), q.value("power", 3), q.value("amplitude", 1.0));
  }
  if (item.type == "extremal") return extremal_function(A, p, q.value("a", 1.0), q.value("b", 1.0));
  if (item.type == "plateau")
    return plateau(A.n(), q.at("rho").get<double>(), q.at("band").get<double>(), q.value("height", 1.0));
  throw InvalidArgument("unknown corpus item type '" + item.type + "'");
}

namespace detail {

inline std::uint64_t item_seed(std::uint64_t seed, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace detail

/// Random bumps: radius in [0.4, 1.6], centre within 2.5 radii of the origin
/// (the support may cross the coordinate hyperplanes), power 2..4,
/// amplitude in [0.5, 2]. Centre offsets are 2.5 R U^4 on weighted axes and
/// 1.5 R (2U - 1)^3 on unweighted ones, so bumps near the origin, where the
/// weight degenerates and Hoelder ratios peak, are well represented. Item i
/// depends only on (seed, i).
inline std::vector<CorpusItem> random_bump_corpus(const WeightVector& A, std::size_t count, std::uint64_t seed) {
  std::vector<CorpusItem> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = detail::item_seed(seed, i);
    std::mt19937_64 rng(s);
    const double R = 0.4 + 1.2 * uniform01(rng);
    std::vector<double> c(A.n());
    for (std::size_t j = 0; j < A.n(); ++j) {
      const double v = uniform01(rng);
      const double w = 2.0 * v - 1.0;
      c[j] = A.positive(j) ? 2.5 * R * v * v * v * v : 1.5 * R * w * w * w;
    }
    const int power = 2 + static_cast<int>(rng() % 3);
    const double amp = 0.5 + 1.5 * uniform01(rng);
    out.push_back({"bump", {{"center", c}, {"radius", R}, {"power", power}, {"amplitude", amp}}, s});
  }
  return out;
}

/// Bumps whose support stays inside R^n_* (centre at least 1.2 radii from
/// every weighted hyperplane), the "off-centre" family.
inline std::vector<CorpusItem> off_center_bump_corpus(const WeightVector& A, std::size_t count, std::uint64_t seed) {
  std::vector<CorpusItem> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = detail::item_seed(seed, i);
    std::mt19937_64 rng(s);
    const double R = 0.5 + uniform01(rng);
    std::vector<double> c(A.n());
    for (std::size_t j = 0; j < A.n(); ++j) c[j] = R * (1.2 + 1.3 * uniform01(rng));
    const int power = 3 + static_cast<int>(rng() % 2);
    out.push_back({"bump", {{"center", c}, {"radius", R}, {"power", power}, {"amplitude", 1.0}}, s});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Morrey.

using PointPair = std::pair<std::vector<double>, std::vector<double>>;

inline constexpr double kEnvelopeSafety = 1.2;

inline double holder_exponent(const WeightVector& A, double p) { return Exponents{p, A.D()}.holder(); }

inline double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

/// |u(x) - u(y)| / |x - y|^alpha for each pair; 0 for coincident points.
inline std::vector<double> holder_ratios(const WeightVector& A, double p, const TestFunction& u,
                                         const std::vector<PointPair>& pairs) {
  const double alpha = holder_exponent(A, p);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    if (x.size() != A.n() || y.size() != A.n()) throw InvalidArgument("pair dimension does not match weight");
    if (!A.in_closed_orthant(x) || !A.in_closed_orthant(y))
      throw InvalidArgument("Hoelder pairs must lie in the closed orthant");
    const double d = distance(x, y);
    out.push_back(d > 0.0 ? std::abs(u.value(x) - u.value(y)) / std::pow(d, alpha) : 0.0);
  }
  return out;
}

/// Pairs around supp u: the maximiser against points along the axis and
/// diagonal directions at 36 distances up to 1.5 support radii, plus
/// `random_pairs` uniform pairs in the support box. All in the closed orthant.
inline std::vector<PointPair> morrey_pairs(const WeightVector& A, const TestFunction& u,
                                           std::size_t random_pairs = 256, std::uint64_t seed = 1) {
  const std::size_t n = A.n();
  const double S = u.support_radius;
  auto project = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < n; ++i)
      if (A.positive(i)) x[i] = std::max(x[i], 0.0);
    return x;
  };
  const std::vector<double> x0 = project(u.argmax.empty() ? u.center : u.argmax);
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> d(n, 0.0);
      d[i] = sgn;
      dirs.push_back(d);
    }
  if (n > 1)
    for (double sgn : {1.0, -1.0}) dirs.emplace_back(n, sgn / std::sqrt(static_cast<double>(n)));
  std::vector<PointPair> out;
  for (const auto& d : dirs)
    for (int k = 1; k <= 36; ++k) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = x0[i] + S * k / 24.0 * d[i];
      y = project(y);
      if (distance(x0, y) > 0.0) out.emplace_back(x0, y);
    }
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double lo = u.center[i] - S, hi = u.center[i] + S;
      if (A.positive(i)) lo = std::max(lo, 0.0), hi = std::max(hi, 0.0);
      x[i] = lo + (hi - lo) * uniform01(rng);
    }
    return x;
  };
  for (std::size_t k = 0; k < random_pairs; ++k) {
    auto x = draw();
    auto y = draw();
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

/// ||grad u||_{L^p(x^A)} by the default backend.
inline double gradient_norm(const WeightVector& A, double p, const TestFunction& u) {
  return norm_pair(A, u, 1.0, p).grad_norm;
}

/// max_pairs |u(x)-u(y)|/|x-y|^alpha / ||grad u||_p (0 for u = 0).
inline double morrey_ratio(const WeightVector& A, double p, const TestFunction& u,
                           const std::vector<PointPair>& pairs) {
  const auto r = holder_ratios(A, p, u, pairs);
  const double lhs = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
  if (lhs == 0.0) return 0.0;
  return lhs / gradient_norm(A, p, u);
}

/// Corpus envelope: the constant is 1.2 times the largest observed ratio.
struct Envelope {
  double max_ratio = 0.0;
  double constant = 0.0;
  std::vector<double> ratios;
};

inline Envelope envelope_from(std::vector<double> ratios) {
  Envelope e;
  e.ratios = std::move(ratios);
  for (double r : e.ratios) e.max_ratio = std::max(e.max_ratio, r);
  e.constant = kEnvelopeSafety * e.max_ratio;
  return e;
}

inline Envelope morrey_envelope(const WeightVector& A, double p, const std::vector<CorpusItem>& corpus,
                                std::size_t random_pairs = 256, std::size_t workers = 1) {
  auto ratios = parallel_map<double>(corpus.size(), workers, [&](std::size_t i) {
    const TestFunction u = make_test_function(A, p, corpus[i]);
    return morrey_ratio(A, p, u, morrey_pairs(A, u, random_pairs, corpus[i].seed));
  });
  return envelope_from(std::move(ratios));
}

/// Hoelder check against an envelope constant C: max ratio <= C ||grad u||_p.
inline VerificationReport morrey_check(const WeightVector& A, double p, const TestFunction& u,
                                       const std::vector<PointPair>& pairs, double envelope_constant,
                                       double tolerance = 1e-12) {
  const auto ratios = holder_ratios(A, p, u, pairs);
  const double lhs = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  const double g = lhs > 0.0 ? gradient_norm(A, p, u) : 0.0;
  VerificationReport r = make_report("morrey", lhs, envelope_constant * g, envelope_constant, Provenance::empirical,
                                     tolerance, u.descriptor);
  r.details = {{"p", p}, {"alpha", holder_exponent(A, p)}, {"gradient_norm", g}, {"ratios", ratios}};
  r.discretization = {{"pairs", pairs.size()}};
  return r;
}

struct PotentialBound {
  double lhs = 0.0;
  double rhs_integral = 0.0;
  /// Relative change between the last two rule orders.
  double self_convergence = 0.0;
  bool converged = true;
};

inline constexpr double kPotentialSelfConvergence = 1e-3;

/// |u(y) - u(0)| against int_{B*_{2|y|}} |grad u| |x|^{1-D} x^A dx. In polar
/// coordinates the weight becomes omega^A dr dsigma, so the singularity at 0
/// disappears; the radial factor uses composite Gauss-Legendre panels.
inline PotentialBound morrey_potential_bound(const WeightVector& A, const TestFunction& u, std::span<const double> y,
                                             std::size_t order = 12, std::size_t panels = 32) {
  const std::size_t n = A.n();
  if (y.size() != n) throw InvalidArgument("point dimension does not match weight");
  for (std::size_t i = 0; i < n; ++i)
    if (A.positive(i) && !(y[i] > 0.0)) throw InvalidArgument("y must lie in R^n_*");
  const double ry = euclidean_norm(y);
  if (!(ry > 0.0)) throw InvalidArgument("y must differ from the origin");
  std::vector<bool> singular(n);
  for (std::size_t i = 0; i < n; ++i) singular[i] = A.positive(i);
  auto integral = [&](std::size_t ord, std::size_t pan) {
    const QuadratureRule sph = sphere_rule(A, singular, ord);
    const Rule1D rad = composite_monomial_rule(ord, 0.0, uniform_breaks(0.0, 2.0 * ry, pan));
    std::vector<double> terms;
    terms.reserve(sph.size() * rad.size());
    std::vector<double> x(n);
    for (std::size_t a = 0; a < rad.size(); ++a)
      for (std::size_t b = 0; b < sph.size(); ++b) {
        const auto w = sph.node(b);
        for (std::size_t i = 0; i < n; ++i) x[i] = rad.nodes[a] * w[i];
        terms.push_back(rad.weights[a] * sph.weights[b] * u.grad_norm(x));
      }
    return pairwise_sum(terms);
  };
  PotentialBound out;
  const std::vector<double> origin(n, 0.0);
  out.lhs = std::abs(u.value(y) - u.value(origin));
  // Off-centre supports leave a kink in the angular integrand; the order is
  // doubled until two successive rules agree or the node budget is spent.
  const std::size_t cap = n <= 2 ? 8 * order : 4 * order;
  double coarse = integral(order, panels);
  for (std::size_t ord = 2 * order; ord <= cap; ord *= 2) {
    out.rhs_integral = integral(ord, panels);
    out.self_convergence = out.rhs_integral > 0.0 ? std::abs(coarse - out.rhs_integral) / out.rhs_integral : 0.0;
    if (out.self_convergence <= kPotentialSelfConvergence) break;
    coarse = out.rhs_integral;
  }
  out.converged = out.self_convergence <= kPotentialSelfConvergence;
  return out;
}

/// The route y -> w -> z with w_i = min(y_i, z_i).
struct ChainedHolder {
  std::vector<double> w;
  double direct = 0.0;
  double leg_yw = 0.0;
  double leg_wz = 0.0;
  /// (|u(y)-u(w)| + |u(w)-u(z)|) / |y-z|^alpha.
  double chained = 0.0;
};

inline ChainedHolder chained_holder(const WeightVector& A, double p, const TestFunction& u,
                                    const std::vector<double>& y, const std::vector<double>& z) {
  ChainedHolder c;
  c.w.resize(A.n());
  for (std::size_t i = 0; i < A.n(); ++i) c.w[i] = std::min(y[i], z[i]);
  const auto r = holder_ratios(A, p, u, {{y, z}, {y, c.w}, {c.w, z}});
  c.direct = r[0];
  c.leg_yw = r[1];
  c.leg_wz = r[2];
  const double d = distance(y, z);
  if (d > 0.0)
    c.chained = (std::abs(u.value(y) - u.value(c.w)) + std::abs(u.value(c.w) - u.value(z))) /
                std::pow(d, holder_exponent(A, p));
  return c;
}

namespace detail {

// supp u (clipped to the closed orthant) inside the closure of the shape,
// probed on the support sphere and the centre.
inline void require_support_inside(const WeightVector& A, const TestFunction& u, const Shape& omega) {
  const std::size_t n = A.n();
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  const double r = u.support_radius * (1.0 - 1e-9);
  for (int k = 0; k < 256; ++k) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      norm += x[i] * x[i];
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u.center[i] + r * x[i] / norm;
      if (A.positive(i)) x[i] = std::max(x[i], 1e-12);
    }
    if (!shape_contains(A, omega, x)) throw InvalidArgument("test function is not supported inside the domain");
  }
}

}  // namespace detail

/// sup|u| <= C diam(Omega)^{1-D/p} ||grad u||_{L^p(Omega, x^A)}, u supported in Omega.
inline VerificationReport sup_bound_check(const WeightVector& A, double p, const TestFunction& u, const Shape& omega,
                                          double envelope_constant, double tolerance = 1e-12) {
  const double alpha = holder_exponent(A, p);
  validate_shape(A, omega);
  detail::require_support_inside(A, u, omega);
  const double sup = u.max_abs ? *u.max_abs : estimated_max_abs(A, u);
  const double diam = shape_diameter(A, omega);
  const double g = sup > 0.0 ? gradient_norm(A, p, u) : 0.0;
  VerificationReport r = make_report("morrey_sup", sup, envelope_constant * std::pow(diam, alpha) * g,
                                     envelope_constant, Provenance::empirical, tolerance, u.descriptor);
  r.details = {{"p", p}, {"alpha", alpha}, {"diameter", diam}, {"gradient_norm", g}};
  return r;
}

/// The sector ball B*_r with r = |c| + R, which contains supp u.
inline Shape enclosing_sector_ball(const TestFunction& u) {
  return Shape{SectorBall{euclidean_norm(u.center) + u.support_radius}};
}

/// sup|u| / (diam^{alpha} ||grad u||_p) on the enclosing sector ball.
inline double sup_ratio(const WeightVector& A, double p, const TestFunction& u) {
  const Shape omega = enclosing_sector_ball(u);
  const double sup = u.max_abs ? *u.max_abs : estimated_max_abs(A, u);
  if (sup == 0.0) return 0.0;
  return sup / (std::pow(shape_diameter(A, omega), holder_exponent(A, p)) * gradient_norm(A, p, u));
}

// ---------------------------------------------------------------------------
// Trudinger.

inline double trudinger_exponent(const WeightVector& A) {
  const double D = A.D();
  if (!(D > 1.0)) throw ExponentOutOfRange("the exponential functional needs D > 1");
  return D / (D - 1.0);
}

/// Fraction theta of the series radius used by admissible_trudinger_c1.
inline constexpr double kSeriesFraction = 0.9;

/// x = (D/(D-1)) (c1 C_0)^{D/(D-1)}, the ratio of the power series
/// sum k^k/k! x^k bounding the functional; converges iff x < 1/e.
inline double trudinger_series_ratio(const WeightVector& A, double c1) {
  const double g = trudinger_exponent(A);
  return g * std::pow(c1 * cp_growth_envelope(A), g);
}

/// c1 with series ratio theta/e, C_0 the growth-ratio grid maximum.
inline double admissible_trudinger_c1(const WeightVector& A, double theta = kSeriesFraction) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("series fraction must lie in (0, 1)");
  const double g = trudinger_exponent(A);
  return std::pow(theta / (std::numbers::e * g), 1.0 / g) / cp_growth_envelope(A);
}

/// 1 + sum_{k>=1} k^k/k! x^k: the bound C_2 the series argument gives.
inline double trudinger_series_bound(const WeightVector& A, double c1) {
  const double x = trudinger_series_ratio(A, c1);
  if (!(x < 1.0 / std::numbers::e)) throw InvalidArgument("series diverges: c1 too large");
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    const double kd = k;
    const double term = std::exp(kd * std::log(kd) - std::lgamma(kd + 1.0) + kd * std::log(x));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

/// (1/m(Omega)) int_Omega exp{(c1 |u| / ||grad u||_{L^D(Omega)})^gamma} x^A dx,
/// gamma = D/(D-1) unless overridden. Outside supp u the integrand is 1, so
/// only exp - 1 is integrated over the support.
inline double trudinger_functional(const WeightVector& A, const TestFunction& u, const Shape& omega, double c1,
                                   double exponent = 0.0) {
  if (!(c1 > 0.0)) throw InvalidArgument("c1 must be positive");
  const double D = A.D();
  const double gamma = exponent > 0.0 ? exponent : trudinger_exponent(A);
  validate_shape(A, omega);
  detail::require_support_inside(A, u, omega);
  const QuadratureRule rule = function_rule(A, u);
  const SampledFunction s = sample_function(u, rule);
  const double gn = s.gradient_norm(D);
  if (!(gn > 0.0)) throw InvalidArgument("gradient norm vanishes: functional undefined");
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    terms[i] = rule.weights[i] * std::expm1(std::pow(c1 * s.values[i] / gn, gamma));
  const double excess = pairwise_sum(terms);
  if (!std::isfinite(excess)) throw NumericalFailure("exponential functional overflows");
  return 1.0 + excess / shape_measure(A, omega);
}

inline VerificationReport trudinger_report(const WeightVector& A, const TestFunction& u, const Shape& omega, double c1,
                                           double envelope_constant, Provenance prov = Provenance::empirical) {
  const double f = trudinger_functional(A, u, omega, c1);
  VerificationReport r = make_report("trudinger", f, envelope_constant, envelope_constant, prov, 0.0, u.descriptor);
  r.details = {{"c1", c1}, {"exponent", trudinger_exponent(A)}, {"series_bound", trudinger_series_bound(A, c1)}};
  r.discretization = {{"backend", "tensor"}, {"order", kTensorOrder}};
  return r;
}

/// log of the functional on Omega = B_1^* for the normalised Moser function
/// u = P^{-1/D} L^{-1/D} min(log(1/|x|), L), L = log(1/epsilon), which has
/// ||grad u||_{L^D} = 1. With s = log(1/r) the functional is
/// D [int_0^L e^{h(s)} ds + e^{h(L)}/D], h(s) = beta s^gamma - D s. The
/// integral uses exact exponentials of the piecewise-linear interpolant of h
/// on panels graded towards both ends, summed in log space.
inline double moser_log_functional(const WeightVector& A, double c1, double exponent, double L) {
  const double D = A.D();
  if (!(L > 0.0)) throw InvalidArgument("log-family parameter must be positive");
  const double P = ball_perimeter(A);
  const double beta = std::pow(c1 * std::pow(P, -1.0 / D) * std::pow(L, -1.0 / D), exponent);
  const double hL = beta * std::pow(L, exponent) - D * L;
  // h near s = 0 directly, near s = L as h(L) - g(L - s) to avoid cancellation.
  auto h = [&](double s) {
    if (s <= 0.5 * L) return beta * std::pow(s, exponent) - D * s;
    const double d = L - s;
    return hL + beta * std::pow(L, exponent) * std::expm1(exponent * std::log1p(-d / L)) + D * d;
  };
  std::vector<double> nodes{0.0, 0.5 * L, L};
  for (double d = 1e-3; d < 0.5 * L; d *= 1.08) {
    nodes.push_back(d);
    nodes.push_back(L - d);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> logs;
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const double a = nodes[j], b = nodes[j + 1];
    if (!(b > a)) continue;
    const double ha = h(a), hb = h(b), delta = std::abs(hb - ha);
    const double shape = delta < 1e-12 ? 0.0 : std::log(-std::expm1(-delta) / delta);
    logs.push_back(std::max(ha, hb) + std::log(b - a) + shape);
  }
  logs.push_back(hL - std::log(D));
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  return std::log(D) + top + std::log(sum);
}

// ---------------------------------------------------------------------------
// Change of variables.

/// Exponents alpha in [0,1)^n mapped to A_i = alpha_i / (1 - alpha_i) by
/// y_i = x_i^{1 - alpha_i}; dx = J y^A dy with J = prod 1/(1 - alpha_i).
struct ChangeOfVariables {
  std::vector<double> alpha;
  WeightVector A;
  double jacobian = 1.0;

  explicit ChangeOfVariables(std::vector<double> a) : alpha(std::move(a)), A(weights_of(alpha)) {
    for (double v : alpha) jacobian /= 1.0 - v;
  }

  static std::vector<double> weights_of(const std::vector<double>& alpha) {
    if (alpha.empty()) throw InvalidArgument("alpha must have n >= 1 entries");
    std::vector<double> A;
    for (double v : alpha) {
      if (!(v >= 0.0 && v < 1.0)) throw InvalidArgument("alpha_i = " + std::to_string(v) + " is outside [0, 1)");
      A.push_back(v / (1.0 - v));
    }
    return A;
  }

  double D() const { return A.D(); }

  /// C with ||u||_{p_*} <= C (sum_i int |x_i|^{p alpha_i} |u_{x_i}|^p)^{1/p}:
  /// J^{1/p_* - 1/p} C_p(A) n^{max(0, 1/2 - 1/p)} / min_i (1 - alpha_i). The
  /// power of n converts sum |v_i|^p into |grad v|^p for p > 2.
  double constant(double p) const {
    const double ps = critical_exponent(A, p);
    double mn = 1.0;
    for (double v : alpha) mn = std::min(mn, 1.0 - v);
    const double n = static_cast<double>(alpha.size());
    return std::pow(jacobian, 1.0 / ps - 1.0 / p) * sobolev_constant(A, p) *
           std::pow(n, std::max(0.0, 0.5 - 1.0 / p)) / mn;
  }
};

/// Left norm and energy^{1/p} of the inequality, from either pipeline.
struct CovSides {
  double lhs = 0.0;
  double energy = 0.0;
};

namespace detail {

inline void cov_box(const ChangeOfVariables& cv, const TestFunction& u, std::vector<double>& lo,
                    std::vector<double>& hi) {
  const std::size_t n = cv.alpha.size();
  if (u.dim != n) throw InvalidArgument("test function dimension does not match alpha");
  lo.resize(n);
  hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = u.center[i] - u.support_radius;
    hi[i] = u.center[i] + u.support_radius;
    if (cv.alpha[i] > 0.0) {
      lo[i] = std::max(lo[i], 0.0);
      hi[i] = std::max(hi[i], 0.0);
    }
  }
}

}  // namespace detail

/// Direct evaluation in x: unweighted |u|^{p_*} and |x_i|^{p alpha_i} |u_{x_i}|^p.
inline CovSides cov_sides_direct(const ChangeOfVariables& cv, double p, const TestFunction& u,
                                 std::size_t order = kTensorOrder, std::size_t panels = 0) {
  const std::size_t n = cv.alpha.size();
  const double ps = critical_exponent(cv.A, p);
  std::vector<double> lo, hi;
  detail::cov_box(cv, u, lo, hi);
  panels = panels ? panels : detail::default_panels(n);
  CovSides out;
  const QuadratureRule flat = composite_box_rule(WeightVector::zero(n), lo, hi, order, panels);
  out.lhs = std::pow(integrate_weighted([&](std::span<const double> x) { return std::pow(std::abs(u.value(x)), ps); },
                                        flat),
                     1.0 / ps);
  double energy = 0.0;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(n, 0.0);
    a[i] = p * cv.alpha[i];
    const QuadratureRule rule = composite_box_rule(WeightVector(a), lo, hi, order, panels);
    energy += integrate_weighted(
        [&](std::span<const double> x) {
          u.grad(x, g);
          return std::pow(std::abs(g[i]), p);
        },
        rule);
  }
  out.energy = std::pow(energy, 1.0 / p);
  return out;
}

/// The same two quantities after y_i = x_i^{1 - alpha_i}: v(y) = u(x(y)) with
/// weight y^A, Jacobian J, and |x_i|^{p alpha_i}|u_{x_i}|^p = (1-alpha_i)^p |v_{y_i}|^p.
inline CovSides cov_sides_pullback(const ChangeOfVariables& cv, double p, const TestFunction& u,
                                   std::size_t order = kTensorOrder, std::size_t panels = 0) {
  const std::size_t n = cv.alpha.size();
  const double ps = critical_exponent(cv.A, p);
  std::vector<double> lo, hi;
  detail::cov_box(cv, u, lo, hi);
  std::vector<double> gam(n);
  for (std::size_t i = 0; i < n; ++i) {
    gam[i] = 1.0 / (1.0 - cv.alpha[i]);
    if (cv.alpha[i] > 0.0) {
      lo[i] = std::pow(lo[i], 1.0 - cv.alpha[i]);
      hi[i] = std::pow(hi[i], 1.0 - cv.alpha[i]);
    }
  }
  panels = panels ? panels : detail::default_panels(n);
  const QuadratureRule rule = composite_box_rule(cv.A, lo, hi, order, panels);
  std::vector<double> x(n), g(n);
  auto to_x = [&](std::span<const double> y) {
    for (std::size_t i = 0; i < n; ++i) x[i] = cv.alpha[i] > 0.0 ? std::pow(y[i], gam[i]) : y[i];
  };
  const double mass = integrate_weighted(
      [&](std::span<const double> y) {
        to_x(y);
        return std::pow(std::abs(u.value(x)), ps);
      },
      rule);
  const double energy = integrate_weighted(
      [&](std::span<const double> y) {
        to_x(y);
        u.grad(x, g);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          // v_{y_i} = u_{x_i} gamma_i y_i^{gamma_i - 1}
          const double vy = cv.alpha[i] > 0.0 ? g[i] * gam[i] * std::pow(y[i], gam[i] - 1.0) : g[i];
          s += std::pow((1.0 - cv.alpha[i]) * std::abs(vy), p);
        }
        return s;
      },
      rule);
  return {std::pow(cv.jacobian * mass, 1.0 / ps), std::pow(cv.jacobian * energy, 1.0 / p)};
}

inline constexpr double kCovPipelineTolerance = 1e-3;

/// ||u||_{L^{p_*}(R^n_*)} <= C (sum_i int |x_i|^{p alpha_i} |u_{x_i}|^p)^{1/p}
/// with C transported from the weighted constant. Both pipelines are run;
/// relative disagreement above 1e-3 raises "pipeline_mismatch".
inline VerificationReport cov_verify(const std::vector<double>& alpha, double p, const TestFunction& u) {
  const ChangeOfVariables cv(alpha);
  if (!(p >= 1.0)) throw ExponentOutOfRange("p must be >= 1");
  if (p >= cv.D()) throw CriticalRegime(p, cv.D());
  const double C = cv.constant(p);
  const CovSides direct = cov_sides_direct(cv, p, u);
  const CovSides pulled = cov_sides_pullback(cv, p, u);
  VerificationReport r = make_report("change_of_variables", direct.lhs, C * direct.energy, C, Provenance::closed_form,
                                     kSobolevTolerance * direct.energy, u.descriptor);
  const double d_lhs = std::abs(direct.lhs - pulled.lhs) / direct.lhs;
  const double d_energy = std::abs(direct.energy - pulled.energy) / direct.energy;
  r.details = {{"alpha", alpha},
               {"A", std::vector<double>(cv.A.exponents().begin(), cv.A.exponents().end())},
               {"D", cv.D()},
               {"p", p},
               {"jacobian", cv.jacobian},
               {"weighted_constant", sobolev_constant(cv.A, p)},
               {"pullback_lhs", pulled.lhs},
               {"pullback_energy", pulled.energy},
               {"lhs_relative_difference", d_lhs},
               {"energy_relative_difference", d_energy}};
  r.discretization = {{"order", kTensorOrder}, {"panels", detail::default_panels(alpha.size())}};
  if (std::max(d_lhs, d_energy) > kCovPipelineTolerance) r.flags.push_back("pipeline_mismatch");
  return r;
}

}  // namespace monoweight
