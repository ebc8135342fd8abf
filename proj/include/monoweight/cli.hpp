#pragma once

// Command-line front end. run_cli parses, dispatches one subcommand and maps
// errors to exit codes:
//   0 all checks pass, 1 verification failure, 2 usage error,
//   3 numerical failure, 4 invalid weight vector, 5 exponent out of range.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monoweight/constants.hpp"
#include "monoweight/errors.hpp"
#include "monoweight/inequalities.hpp"
#include "monoweight/isoperimetry.hpp"
#include "monoweight/neumann.hpp"
#include "monoweight/parallel.hpp"
#include "monoweight/rearrangement.hpp"
#include "monoweight/report.hpp"
#include "monoweight/weight.hpp"

namespace monoweight {

enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
  kExitInvalidWeight = 4,
  kExitExponent = 5,
};

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names{"constants",   "verify-sobolev", "verify-isop",
                                              "verify-morrey", "verify-trudinger", "rearrange",
                                              "shape-search", "solve-neumann",  "cov-verify"};
  return names;
}

namespace cli_detail {

inline std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidArgument(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(flag) + ": empty list");
  return out;
}

inline std::string item_id(const std::string& command, std::size_t k) {
  std::ostringstream os;
  os << command << '-' << std::setw(4) << std::setfill('0') << k;
  return os.str();
}

inline ReportRecord from_verification(std::string id, const VerificationReport& r, nlohmann::json extra = {}) {
  nlohmann::json body = to_json(r);
  if (!extra.is_null()) body["input"] = std::move(extra);
  return {std::move(id), r.pass, r.margin, std::move(body)};
}

inline WeightVector require_weight(const RunConfig& c) {
  if (c.A.empty()) throw InvalidArgument("--A is required for " + c.command);
  return WeightVector(c.A);
}

inline std::vector<double> exponents(const RunConfig& c, double fallback) {
  if (!c.p_grid.empty()) return c.p_grid;
  return {c.p.value_or(fallback)};
}

inline std::vector<CorpusItem> bump_corpus(const WeightVector& A, const RunConfig& c, std::uint64_t seed) {
  if (c.corpus == "random") return random_bump_corpus(A, c.count, seed);
  if (c.corpus == "offcenter") return off_center_bump_corpus(A, c.count, seed);
  throw InvalidArgument("corpus must be random or offcenter for " + c.command + ", got '" + c.corpus + "'");
}

// ---------------------------------------------------------------------------

inline std::vector<ReportRecord> run_constants(const RunConfig& c, std::ostream& os) {
  const WeightVector A = require_weight(c);
  std::vector<double> ps = c.p_grid;
  if (ps.empty() && c.p) ps.push_back(*c.p);
  for (double p : ps)
    if (p != 1.0) critical_exponent(A, p);
  nlohmann::ordered_json j;
  j["A"] = c.A;
  j["n"] = A.n();
  j["D"] = A.D();
  j["k"] = A.k();
  j["m_ball"] = ball_measure(A);
  j["P_ball"] = ball_perimeter(A);
  j["C1"] = isoperimetric_constant(A);
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (double p : ps) {
    nlohmann::ordered_json row;
    row["p"] = p;
    row["p_star"] = p == 1.0 ? A.D() / (A.D() - 1.0) : critical_exponent(A, p);
    row["C_p"] = sobolev_constant(A, p);
    table.push_back(row);
  }
  if (ps.size() == 1) {
    for (auto& [k, v] : table[0].items()) j[k] = v;
  } else if (!ps.empty()) {
    j["table"] = table;
  }
  j["config"] = to_json(c);
  if (c.out.empty()) os << j.dump(2) << '\n';
  return {{"constants", true, 0.0, nlohmann::json::parse(j.dump())}};
}

inline std::vector<ReportRecord> run_sobolev(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  const double tol = c.tol.value_or(1e-3);
  std::vector<ReportRecord> out;
  for (double p : exponents(c, 2.0)) {
    critical_exponent(A, p);
    if (c.corpus == "extremal") {
      const VerificationReport r = sobolev_report(A, p, extremal_function(A, p, 1.0, 1.0), tol);
      out.push_back(from_verification(item_id(c.command, out.size()), r, {{"type", "extremal"}, {"a", 1.0}, {"b", 1.0}}));
      continue;
    }
    const auto items = bump_corpus(A, c, c.seed);
    const auto recs = parallel_map<ReportRecord>(items.size(), c.workers, [&](std::size_t i) {
      const VerificationReport r = sobolev_report(A, p, make_test_function(A, p, items[i]), tol);
      return from_verification("", r, corpus_item_json(A, p, items[i]));
    });
    for (ReportRecord r : recs) {
      r.id = item_id(c.command, out.size());
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::vector<ReportRecord> run_isop(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  const double tol = c.tol.value_or(kIsoperimetricTolerance);
  std::vector<Shape> shapes;
  if (c.corpus == "random") {
    shapes = random_shape_corpus(A, c.count, c.seed);
  } else if (c.corpus == "sector") {
    for (double r : {0.5, 1.0, 3.0}) shapes.push_back({SectorBall{r}, Containment::orthant});
  } else {
    throw InvalidArgument("corpus must be random or sector for verify-isop, got '" + c.corpus + "'");
  }
  const auto reps = parallel_map<IsoperimetricReport>(
      shapes.size(), c.workers, [&](std::size_t i) { return isoperimetric_quotient(A, shapes[i], tol); });
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < reps.size(); ++i)
    out.push_back({item_id(c.command, i), reps[i].pass, reps[i].margin, to_json(reps[i])});
  return out;
}

/// Envelope from a calibration corpus (seed), checks on an independent
/// validation corpus (seed + 1).
inline std::vector<ReportRecord> run_morrey(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  const double p = c.p.value_or(A.D() + 2.0);
  holder_exponent(A, p);
  const auto calib = bump_corpus(A, c, c.seed), valid = bump_corpus(A, c, c.seed + 1);
  const Envelope env = morrey_envelope(A, p, calib, 256, c.workers);
  const auto recs = parallel_map<ReportRecord>(valid.size(), c.workers, [&](std::size_t i) {
    const TestFunction u = make_test_function(A, p, valid[i]);
    const VerificationReport r = morrey_check(A, p, u, morrey_pairs(A, u, 256, valid[i].seed), env.constant);
    ReportRecord rec = from_verification("", r, corpus_item_json(A, p, valid[i]));
    rec.body["envelope"] = {{"calibration_max_ratio", env.max_ratio}, {"constant", env.constant}};
    return rec;
  });
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out.push_back(recs[i]);
    out.back().id = item_id(c.command, i);
  }
  return out;
}

inline std::vector<ReportRecord> run_trudinger(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  if (A.D() <= 1.0) throw ExponentOutOfRange("the exponential functional needs D > 1");
  const double D = A.D();
  const double c1 = admissible_trudinger_c1(A);
  const auto calib = bump_corpus(A, c, c.seed), valid = bump_corpus(A, c, c.seed + 1);
  auto functional = [&](const CorpusItem& item) {
    const TestFunction u = make_test_function(A, D, item);
    return trudinger_functional(A, u, enclosing_sector_ball(u), c1);
  };
  const auto calib_values =
      parallel_map<double>(calib.size(), c.workers, [&](std::size_t i) { return functional(calib[i]); });
  const Envelope env = envelope_from(calib_values);
  const auto recs = parallel_map<ReportRecord>(valid.size(), c.workers, [&](std::size_t i) {
    const TestFunction u = make_test_function(A, D, valid[i]);
    const VerificationReport r = trudinger_report(A, u, enclosing_sector_ball(u), c1, env.constant);
    ReportRecord rec = from_verification("", r, corpus_item_json(A, D, valid[i]));
    rec.body["envelope"] = {{"calibration_max", env.max_ratio}, {"constant", env.constant}};
    return rec;
  });
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out.push_back(recs[i]);
    out.back().id = item_id(c.command, i);
  }
  return out;
}

/// Equimeasurability, L^{p*} norm and Polya-Szego for p in the p grid
/// (default {1, 2}); the L^{p*} exponent uses --p (default 2).
inline std::vector<ReportRecord> run_rearrange(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  const double tol = c.tol.value_or(1e-3);
  const double p = c.p.value_or(2.0);
  const double q = critical_exponent(A, p);
  const std::vector<double> ps = c.p_grid.empty() ? std::vector<double>{1.0, 2.0} : c.p_grid;
  const auto items = bump_corpus(A, c, c.seed);
  struct Item {
    ReportRecord rec;
    std::string profile_csv;
  };
  const auto res = parallel_map<Item>(items.size(), c.workers, [&](std::size_t i) {
    const TestFunction u = make_test_function(A, p, items[i]);
    const RadialProfile prof = rearrange(A, u);
    const auto eq = equimeasurability(A, u, prof);
    const double direct =
        std::pow(support_integral(A, u, [q](double v, double) { return std::pow(std::abs(v), q); }, 12, 16), 1.0 / q);
    const double star = std::pow(profile_integral(A, prof, [q](double v) { return std::pow(v, q); }), 1.0 / q);
    const double norm_error = std::abs(star - direct) / direct;
    nlohmann::json ps_json = nlohmann::json::array();
    bool pass = eq.max_error <= tol && norm_error <= tol;
    double margin = std::min(tol - eq.max_error, tol - norm_error);
    for (double pp : ps) {
      const auto r = polya_szego_check(A, u, [pp](double s) { return std::pow(s, pp); }, &prof);
      ps_json.push_back({{"p", pp}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", r.pass}});
      pass = pass && r.pass;
      margin = std::min(margin, (r.rhs * (1.0 + kPolyaSzegoRelTolerance) - r.lhs) / r.rhs);
    }
    nlohmann::json body = {{"input", corpus_item_json(A, p, items[i])},
                           {"equimeasurability_error", eq.max_error},
                           {"levels", prof.levels.size()},
                           {"norm_exponent", q},
                           {"norm", direct},
                           {"rearranged_norm", star},
                           {"norm_relative_error", norm_error},
                           {"polya_szego", ps_json},
                           {"tolerance", tol}};
    return Item{{"", pass, margin, body}, prof.to_csv()};
  });
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < res.size(); ++i) {
    out.push_back(res[i].rec);
    out.back().id = item_id(c.command, i);
    write_side_file(c, "profile_" + std::to_string(i), res[i].profile_csv);
  }
  return out;
}

inline std::vector<ReportRecord> run_shape_search(const RunConfig& c) {
  const WeightVector A = require_weight(c);
  if (A.n() != 2) throw InvalidArgument("shape-search needs n = 2");
  const double tol = c.tol.value_or(kIsoperimetricTolerance);
  std::mt19937_64 rng(c.seed);
  std::vector<Star2D> starts;
  for (std::size_t i = 0; i < c.count; ++i) starts.push_back(std::get<Star2D>(detail::random_star(A, rng).kind));
  const auto res = multi_start_search(A, starts, c.steps, 0.05, c.workers);
  const double C1 = isoperimetric_constant(A);
  std::vector<ReportRecord> out;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double q = res[i].trace.back();
    nlohmann::json body = {{"initial_coefficients", starts[i].coeffs},
                           {"final_coefficients", res[i].profile.coeffs},
                           {"initial_quotient", res[i].trace.front()},
                           {"final_quotient", q},
                           {"C1", C1},
                           {"accepted", res[i].accepted},
                           {"rejected", res[i].rejected},
                           {"aborted", res[i].aborted},
                           {"stationary", res[i].stationary},
                           {"distance_from_circle", relative_sup_distance_from_constant(res[i].profile)},
                           {"tolerance", tol}};
    out.push_back({item_id(c.command, i), q >= C1 - tol, q - C1, body});
    std::ostringstream trace;
    trace.precision(17);
    trace << "step,quotient\n";
    for (std::size_t k = 0; k < res[i].trace.size(); ++k) trace << k << ',' << res[i].trace[k] << '\n';
    write_side_file(c, "trace_" + std::to_string(i), trace.str());
  }
  return out;
}

inline std::vector<PlanarDomain> neumann_domains() {
  return {disk_domain({1.5, 1.5}, 0.8), RoundedSectorDomain{},
          EllipseDomain{{2.0, 1.2}, 1.2, 0.6, std::numbers::pi / 6.0}};
}

/// Compatibility per domain and spacing, ABP chain per solve, and one
/// convergence-order record per domain when two or more spacings are given.
inline std::vector<ReportRecord> run_neumann(const RunConfig& c) {
  const WeightVector A = c.A.empty() ? WeightVector{1.0, 1.0} : WeightVector(c.A);
  if (A.n() != 2) throw InvalidArgument("solve-neumann needs n = 2");
  const std::vector<double> hs = c.h_grid.empty() ? std::vector<double>{0.02, 0.01} : c.h_grid;
  const double min_order = 1.8;
  std::vector<ReportRecord> out;
  const auto domains = neumann_domains();
  for (std::size_t d = 0; d < domains.size(); ++d) {
    std::vector<double> errors;
    const ReferenceValues ref = reference_values(A, domains[d]);
    for (double h : hs) {
      const GridDomain2D g = make_grid_domain(domains[d], h);
      const NeumannSolution s = solve_neumann(A, g);
      const double ratio = ref.perimeter / ref.measure;
      const double tol = std::max(1e-3, 5.0 * h * h) * s.b;
      const VerificationReport abp = abp_chain_check(A, s.b, ref.measure);
      nlohmann::json body = {{"domain", domain_name(domains[d])},
                             {"h", h},
                             {"cells", g.active_count()},
                             {"iterations", s.iterations},
                             {"cg_residual", s.residual},
                             {"b", s.b},
                             {"P_over_m", ratio},
                             {"relative_error", std::abs(s.b - ratio) / ratio},
                             {"tolerance", tol},
                             {"abp_chain", to_json(abp)},
                             {"grid", domain_to_json(g)}};
      errors.push_back(std::abs(s.b - ratio) / ratio);
      const double margin = tol - std::abs(s.b - ratio);
      out.push_back({item_id(c.command, out.size()), margin >= 0.0 && abp.pass, margin, body});
      std::ostringstream name;
      name << "u_" << d << "_h" << h;
      write_side_file(c, name.str(), grid_to_csv(g, s.u));
    }
    for (std::size_t k = 1; k < hs.size(); ++k) {
      const double order = std::log(errors[k - 1] / errors[k]) / std::log(hs[k - 1] / hs[k]);
      nlohmann::json body = {{"domain", domain_name(domains[d])},
                             {"h_coarse", hs[k - 1]},
                             {"h_fine", hs[k]},
                             {"observed_order", order},
                             {"required_order", min_order}};
      out.push_back({item_id(c.command, out.size()), order >= min_order, order - min_order, body});
    }
  }
  for (const WeightVector& B : {A, WeightVector{0.0, 0.0}}) {
    const VerificationReport r = ball_solution_certificate(B);
    out.push_back(from_verification(item_id(c.command, out.size()), r, {{"A", B.exponents()}}));
  }
  return out;
}

inline std::vector<ReportRecord> run_cov(const RunConfig& c) {
  const std::vector<double> alpha = c.alpha.empty() ? std::vector<double>{0.5, 0.5} : c.alpha;
  const ChangeOfVariables cv(alpha);
  std::vector<ReportRecord> out;
  for (double p : exponents(c, 2.0)) {
    const auto items = bump_corpus(cv.A, c, c.seed);
    const auto recs = parallel_map<ReportRecord>(items.size(), c.workers, [&](std::size_t i) {
      return from_verification("", cov_verify(alpha, p, make_test_function(cv.A, p, items[i])),
                               corpus_item_json(cv.A, p, items[i]));
    });
    for (ReportRecord r : recs) {
      r.id = item_id(c.command, out.size());
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline void apply_defaults(RunConfig& c) {
  struct D {
    const char* corpus;
    std::size_t count;
  };
  static const std::map<std::string, D> defaults{
      {"constants", {"", 0}},          {"verify-sobolev", {"random", 100}}, {"verify-isop", {"random", 200}},
      {"verify-morrey", {"random", 50}}, {"verify-trudinger", {"random", 50}}, {"rearrange", {"offcenter", 20}},
      {"shape-search", {"", 4}},       {"solve-neumann", {"", 0}},          {"cov-verify", {"random", 20}}};
  const D& d = defaults.at(c.command);
  if (c.corpus.empty()) c.corpus = d.corpus;
  if (c.count == 0) c.count = d.count;
  if (c.command == "shape-search" && c.steps == 0) c.steps = 100;
  if (c.workers == 0) c.workers = 1;
}

}  // namespace cli_detail

/// Runs one subcommand for an already merged configuration.
inline std::vector<ReportRecord> dispatch(RunConfig& c, std::ostream& os) {
  using namespace cli_detail;
  apply_defaults(c);
  if (c.command == "constants") return run_constants(c, os);
  if (c.command == "verify-sobolev") return run_sobolev(c);
  if (c.command == "verify-isop") return run_isop(c);
  if (c.command == "verify-morrey") return run_morrey(c);
  if (c.command == "verify-trudinger") return run_trudinger(c);
  if (c.command == "rearrange") return run_rearrange(c);
  if (c.command == "shape-search") return run_shape_search(c);
  if (c.command == "solve-neumann") return run_neumann(c);
  if (c.command == "cov-verify") return run_cov(c);
  throw InvalidArgument("unknown command '" + c.command + "'");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
  CLI::App app{"Numerical verification of monomial-weight inequalities"};
  app.require_subcommand(1);
  struct Flags {
    std::string A, p_grid, alpha, h, corpus, out, format, config;
    double p = 0.0, tol = 0.0;
    std::size_t count = 0, steps = 0, workers = 1;
    std::uint64_t seed = 1;
  } f;
  std::vector<CLI::App*> subs;
  for (const std::string& name : cli_commands()) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--A", f.A, "weight exponents, comma separated");
    s->add_option("--p", f.p, "integrability exponent");
    s->add_option("--p-grid", f.p_grid, "exponents, comma separated");
    s->add_option("--alpha", f.alpha, "cov-verify exponents in [0,1), comma separated");
    s->add_option("--h-grid", f.h, "solve-neumann grid spacings, comma separated");
    s->add_option("--corpus", f.corpus, "corpus kind");
    s->add_option("--count", f.count, "corpus size");
    s->add_option("--seed", f.seed, "corpus seed");
    s->add_option("--tol", f.tol, "tolerance");
    s->add_option("--steps", f.steps, "shape-search iterations");
    s->add_option("--out", f.out, "output directory");
    s->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--workers", f.workers, "worker threads");
    s->add_option("--config", f.config, "JSON config file; flags override it");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, err;
    const int code = app.exit(e, o, err);
    os << o.str();
    es << err.str();
    return code == 0 ? kExitPass : kExitUsage;
  }
  try {
    RunConfig c;
    CLI::App* s = nullptr;
    for (CLI::App* sub : subs)
      if (sub->parsed()) s = sub;
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw InvalidArgument("cannot read config file " + f.config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config file: ") + e.what());
      }
      apply_config_json(c, j);
    }
    c.command = s->get_name();
    auto given = [s](const char* flag) { return s->count(flag) > 0; };
    if (given("--A")) c.A = cli_detail::parse_list(f.A, "--A");
    if (given("--p")) c.p = f.p;
    if (given("--p-grid")) c.p_grid = cli_detail::parse_list(f.p_grid, "--p-grid");
    if (given("--alpha")) c.alpha = cli_detail::parse_list(f.alpha, "--alpha");
    if (given("--h-grid")) c.h_grid = cli_detail::parse_list(f.h, "--h-grid");
    if (given("--corpus")) c.corpus = f.corpus;
    if (given("--count")) c.count = f.count;
    if (given("--seed")) c.seed = f.seed;
    if (given("--tol")) c.tol = f.tol;
    if (given("--steps")) c.steps = f.steps;
    if (given("--out")) c.out = f.out;
    if (given("--format")) c.format = f.format;
    if (given("--workers")) c.workers = f.workers;

    const auto records = dispatch(c, os);
    std::ostringstream sink;
    const Summary sum = emit_report(records, c, c.command == "constants" ? sink : os);
    if (sum.fail_ids.empty()) return kExitPass;
    es << "failed:";
    for (const std::string& id : sum.fail_ids) es << ' ' << id;
    es << '\n';
    return kExitFail;
  } catch (const InvalidWeight& e) {
    es << "invalid weight: " << e.what() << '\n';
    return kExitInvalidWeight;
  } catch (const ExponentOutOfRange& e) {
    es << "exponent out of range: " << e.what() << '\n';
    return kExitExponent;
  } catch (const InvalidArgument& e) {
    es << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    es << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    es << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace monoweight
