// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "monoweight/monoweight.hpp"

using namespace monoweight;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<WeightVector> weight_set() {
  return {WeightVector{0.0},           WeightVector{2.0},           WeightVector{0.5},
          WeightVector{0.0, 0.0},      WeightVector{1.0, 1.0},      WeightVector{0.5, 2.3},
          WeightVector{2.0, 0.0},      WeightVector{0.0, 0.0, 0.0}, WeightVector{1.0, 1.0, 1.0},
          WeightVector{0.5, 0.0, 1.5}, WeightVector{3.0, 0.25, 0.0}, WeightVector{2.0, 2.0, 2.0}};
}

double one(std::span<const double>) { return 1.0; }

Outcome closed_form_measure() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const WeightVector& A : weight_set()) {
    const double m = integrate_weighted(one, sector_ball_rule(A, 1.0, 24));
    worst = std::max(worst, std::abs(m - ball_measure(A)) / ball_measure(A));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t < 10.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome perimeter_identity() {
  double worst = 0.0;
  for (const WeightVector& A : weight_set()) {
    const BoundaryPatch patch = sphere_orthant_patch(A, std::vector<double>(A.n(), 0.0), 1.0);
    const double P = surface_integrate(A, patch, one, 32) * std::pow(2.0, static_cast<double>(A.n() - A.k()));
    worst = std::max(worst, std::abs(P - A.D() * ball_measure(A)) / P);
  }
  return {worst <= 1e-6, "max |P - D m|/P " + fmt("%.2e", worst)};
}

Outcome isoperimetric_sweep() {
  std::size_t shapes = 0, failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const WeightVector& A : weight_set()) {
    for (const Shape& s : random_shape_corpus(A, 200, 7)) {
      const IsoperimetricReport r = isoperimetric_quotient(A, s);
      ++shapes;
      worst = std::min(worst, r.margin);
      if (r.quotient < r.sharp_constant - 1e-6) ++failures;
    }
  }
  double sector_dev = 0.0;
  for (const WeightVector& A : weight_set())
    for (double r : {0.5, 1.0, 3.0}) {
      const IsoperimetricReport rep = isoperimetric_quotient(A, Shape{SectorBall{r}, Containment::orthant});
      sector_dev = std::max(sector_dev, std::abs(rep.quotient - rep.sharp_constant));
    }
  const WeightVector A{1.0, 1.0};
  const IsoperimetricReport box = isoperimetric_quotient(A, Shape{Box{{0.0, 0.0}, {1.0, 1.0}}});
  const bool anchor = std::abs(box.quotient - std::pow(4.0, 0.75)) <= 1e-12 &&
                      std::abs(box.sharp_constant - 4.0 * std::pow(8.0, -0.25)) <= 1e-12 &&
                      std::abs(box.margin - 0.45) < 0.01;
  return {failures == 0 && sector_dev <= 1e-6 && anchor,
          std::to_string(shapes) + " shapes, " + std::to_string(failures) + " below bound, worst margin " +
              fmt("%.3e", worst) + ", sector |Q - C1| " + fmt("%.1e", sector_dev) + ", unit box margin " +
              fmt("%.4f", box.margin)};
}

Outcome sharp_sobolev() {
  struct Pair {
    WeightVector A;
    double p;
  };
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [A, p] : {Pair{WeightVector{1.0, 1.0}, 2.0}, Pair{WeightVector::zero(3), 2.0},
                             Pair{WeightVector{2.0, 0.0}, 1.5}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double Cp = sobolev_constant(A, p);
    const double extremal = sobolev_quotient(A, p, extremal_function(A, p, 1.0, 1.0));
    double worst = 0.0;
    for (const CorpusItem& item : random_bump_corpus(A, 100, 2024))
      worst = std::max(worst, sobolev_quotient(A, p, make_test_function(A, p, item)));
    const double t = seconds_since(t0);
    pass = pass && std::abs(extremal - Cp) <= 1e-2 && worst <= Cp + 1e-3 && t < 120.0;
    detail << "D=" << A.D() << " p=" << p << ": |Q_ext - C_p| " << fmt("%.1e", std::abs(extremal - Cp))
           << ", max bump Q/C_p " << fmt("%.3f", worst / Cp) << ", " << fmt("%.1f", t) << " s; ";
  }
  return {pass, detail.str()};
}

Outcome full_ball_factor() {
  double closed = 0.0, quad = 0.0;
  for (const WeightVector& A : weight_set()) {
    const double expect = std::pow(2.0, A.k() / A.D()) * isoperimetric_constant(A);
    const double q = isoperimetric_quotient(A, Shape{SectorBall{1.0}, Containment::symmetric}).quotient;
    closed = std::max(closed, std::abs(q - expect) / expect);
    const std::vector<double> c(A.n(), 0.0);
    const double m = integrate_weighted(one, ball_rule(A, c, 1.0, 24, true));
    const double P = integrate_weighted(one, ball_surface_rule(A, c, 1.0, 24, true));
    quad = std::max(quad, std::abs(P / std::pow(m, (A.D() - 1.0) / A.D()) - expect) / expect);
  }
  return {closed <= 1e-10 && quad <= 1e-5, "closed form " + fmt("%.1e", closed) + ", quadrature " + fmt("%.1e", quad)};
}

Outcome rearrangement() {
  const WeightVector A{1.0, 1.0};
  const double q = critical_exponent(A, 2.0);
  double eq = 0.0, norm = 0.0, ps = -std::numeric_limits<double>::infinity();
  bool levels = true;
  for (const CorpusItem& item : off_center_bump_corpus(A, 20, 1)) {
    const TestFunction u = make_test_function(A, 2.0, item);
    const RadialProfile prof = rearrange(A, u);
    levels = levels && prof.levels.size() == kRearrangementLevels;
    eq = std::max(eq, equimeasurability(A, u, prof).max_error);
    const double direct =
        std::pow(support_integral(A, u, [q](double v, double) { return std::pow(std::abs(v), q); }, 12, 16), 1.0 / q);
    const double star = std::pow(profile_integral(A, prof, [q](double v) { return std::pow(v, q); }), 1.0 / q);
    norm = std::max(norm, std::abs(star - direct) / direct);
    for (double p : {1.0, 2.0}) {
      const PolyaSzegoResult r = polya_szego_check(A, u, [p](double s) { return std::pow(s, p); }, &prof);
      ps = std::max(ps, (r.lhs - r.rhs) / r.rhs);
    }
  }
  return {levels && eq <= 1e-3 && norm <= 1e-3 && ps <= 5e-3,
          "equimeasurability " + fmt("%.1e", eq) + ", norm " + fmt("%.1e", norm) + ", max (lhs-rhs)/rhs " +
              fmt("%.1e", ps)};
}

Outcome neumann() {
  const WeightVector A{1.0, 1.0};
  const std::vector<PlanarDomain> domains{disk_domain({1.5, 1.5}, 0.8), RoundedSectorDomain{},
                                          EllipseDomain{{2.0, 1.2}, 1.2, 0.6, std::numbers::pi / 6.0}};
  bool pass = true;
  std::ostringstream detail;
  for (const PlanarDomain& d : domains) {
    double err[2];
    for (int k = 0; k < 2; ++k) {
      const VerificationReport r = compatibility_report(A, d, k == 0 ? 0.02 : 0.01);
      pass = pass && r.pass;
      err[k] = r.details["relative_error"].get<double>();
    }
    const double order = std::log2(err[0] / err[1]);
    pass = pass && order >= 1.8;
    detail << domain_name(d) << " order " << fmt("%.2f", order) << "; ";
  }
  // Unweighted disk: b = 2 and u = |x - c|^2/2 up to a constant.
  const WeightVector Z{0.0, 0.0};
  const Point2 c{3.0137, 2.9711};
  double prev = 0.0, last = 0.0;
  for (double h : {0.02, 0.01}) {
    const GridDomain2D g = make_grid_domain(disk_domain(c, 1.0), h);
    const NeumannSolution s = solve_neumann(Z, g);
    const CellWeights w = cell_weights(Z, g);
    std::vector<double> exact(g.size()), ones(g.size(), 1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Point2 x = g.center(k);
      exact[k] = 0.5 * ((x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]));
    }
    const double shift = weighted_inner(w, g, exact, ones) / w.measure;
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (g.active(k)) err = std::max(err, std::abs(s.u[k] - exact[k] + shift));
    pass = pass && std::abs(s.b - 2.0) <= 5.0 * h * h * 2.0 && err <= h * h;
    prev = last;
    last = err;
  }
  pass = pass && prev / last > 3.0;
  detail << "disk A=0 max|u - paraboloid| " << fmt("%.1e", last) << " at h=0.01";
  return {pass, detail.str()};
}

Outcome morrey() {
  const WeightVector A{1.0, 1.0};
  const double p = 6.0;
  const TestFunction u = bump({0.4, 0.9}, 1.1, 3);
  const double ref = morrey_ratio(A, p, u, morrey_pairs(A, u));
  double dil = 0.0;
  for (double lambda : {0.5, 2.0}) {
    const TestFunction v = dilated(u, lambda);
    dil = std::max(dil, std::abs(morrey_ratio(A, p, v, morrey_pairs(A, v)) - ref) / ref);
  }
  const Envelope e1 = morrey_envelope(A, p, random_bump_corpus(A, 50, 101));
  const Envelope e2 = morrey_envelope(A, p, random_bump_corpus(A, 50, 202));
  const double ratio = e2.max_ratio / e1.max_ratio;
  return {dil <= 1e-6 && std::isfinite(e1.constant) && std::isfinite(e2.constant) && std::abs(ratio - 1.0) <= 0.1,
          "dilation " + fmt("%.1e", dil) + ", envelopes " + fmt("%.4f", e1.max_ratio) + " / " +
              fmt("%.4f", e2.max_ratio)};
}

Outcome trudinger() {
  const WeightVector A{1.0, 1.0};
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
  double worst = 0.0;
  for (double f : values(6)) worst = std::max(worst, f);
  const double c0 = cp_growth_envelope(A);
  // Log family: the exponent 5% above D/(D-1) grows without bound.
  const double D = A.D(), gamma = trudinger_exponent(A);
  const double kappa = std::pow(c1 * std::pow(ball_perimeter(A), -1.0 / D), 1.05 * gamma);
  const double L_star = std::pow(D / kappa, 1.0 / 0.05);
  bool monotone = true;
  double prev = -1.0;
  for (double m : {2.0, 4.0, 8.0, 16.0}) {
    const double v = moser_log_functional(A, c1, 1.05 * gamma, m * L_star);
    monotone = monotone && v > prev;
    prev = v;
  }
  return {worst <= e.constant && worst <= series && std::isfinite(c0) && monotone && prev > 1e6,
          "validation max " + fmt("%.4f", worst) + " vs envelope " + fmt("%.4f", e.constant) +
              ", growth envelope " + fmt("%.3f", c0) + ", log family at 16 L* " + fmt("%.2e", prev)};
}

Outcome change_of_variables() {
  const ChangeOfVariables cv({0.5, 0.5});
  double worst = 0.0;
  for (const CorpusItem& item : random_bump_corpus(cv.A, 20, 13)) {
    const TestFunction u = make_test_function(cv.A, 2.0, item);
    const CovSides a = cov_sides_direct(cv, 2.0, u), b = cov_sides_pullback(cv, 2.0, u);
    worst = std::max({worst, std::abs(a.lhs - b.lhs) / a.lhs, std::abs(a.energy - b.energy) / a.energy});
  }
  return {worst <= 1e-3, "max rel disagreement " + fmt("%.1e", worst)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "monoweight_acceptance";
  fs::remove_all(dir);
  const std::vector<std::pair<std::string, std::string>> sweeps{
      {"verify-sobolev", "--A 1,1 --count 20 --seed 9"},
      {"verify-isop", "--A 1,0.5 --count 200 --seed 9"},
      {"verify-morrey", "--A 1,1 --p 6 --count 10 --seed 9 --format csv"}};
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  bool pass = true;
  for (const auto& [cmd, args] : sweeps) {
    std::string files[2];
    for (int k = 0; k < 2; ++k) {
      const std::string line =
          std::string(MONOWEIGHT_CLI_PATH) + " " + cmd + " " + args + " --out " + dir.string() + " >/dev/null 2>&1";
      pass = pass && std::system(line.c_str()) == 0;
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().filename().string().starts_with(cmd)) files[k] += slurp(entry.path());
      fs::remove_all(dir);
    }
    pass = pass && !files[0].empty() && files[0] == files[1];
  }
  return {pass, std::to_string(sweeps.size()) + " sweeps re-run through the CLI binary"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form measure", closed_form_measure},
      {"perimeter identity", perimeter_identity},
      {"isoperimetric sweep", isoperimetric_sweep},
      {"sharp Sobolev constant", sharp_sobolev},
      {"full-ball factor", full_ball_factor},
      {"rearrangement", rearrangement},
      {"Neumann compatibility", neumann},
      {"Morrey", morrey},
      {"Trudinger", trudinger},
      {"change of variables", change_of_variables},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
