#pragma once

// Run configuration and report files for the command-line front end.
//
// Records are JSON objects with a fixed head (id, command, pass, margin)
// followed by the command-specific body and the full RunConfig. JSON-lines
// output keeps that order; CSV flattens the body into sorted column paths.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoweight/errors.hpp"

namespace monoweight {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::vector<double> A;
  std::optional<double> p;
  std::vector<double> p_grid;
  std::vector<double> alpha;
  std::vector<double> h_grid;
  std::string corpus;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::size_t steps = 0;
  std::string out;
  std::string format = "json";
  std::size_t workers = 1;
};

inline ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["A"] = c.A;
  j["n"] = c.A.size();
  j["p"] = c.p ? ordered_json(*c.p) : ordered_json(nullptr);
  j["p_grid"] = c.p_grid;
  j["alpha"] = c.alpha;
  j["h_grid"] = c.h_grid;
  j["corpus"] = c.corpus;
  j["count"] = c.count;
  j["seed"] = c.seed;
  j["tol"] = c.tol ? ordered_json(*c.tol) : ordered_json(nullptr);
  j["steps"] = c.steps;
  j["out"] = c.out;
  j["format"] = c.format;
  j["workers"] = c.workers;
  return j;
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are an error so
/// that a misspelt setting cannot be silently ignored.
inline void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  static const std::set<std::string> known{"command", "A",    "n",     "p",   "p_grid", "alpha",  "h_grid", "corpus",
                                           "count",   "seed", "tol",   "steps", "out",  "format", "workers"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::remove_reference_t<decltype(field)>>();
  };
  take("command", c.command);
  take("A", c.A);
  if (j.contains("p") && !j["p"].is_null()) c.p = j["p"].get<double>();
  take("p_grid", c.p_grid);
  take("alpha", c.alpha);
  take("h_grid", c.h_grid);
  take("corpus", c.corpus);
  take("count", c.count);
  take("seed", c.seed);
  if (j.contains("tol") && !j["tol"].is_null()) c.tol = j["tol"].get<double>();
  take("steps", c.steps);
  take("out", c.out);
  take("format", c.format);
  take("workers", c.workers);
}

struct ReportRecord {
  std::string id;
  bool pass = true;
  double margin = 0.0;
  nlohmann::json body;
};

inline ordered_json record_json(const ReportRecord& r, const RunConfig& c) {
  ordered_json j;
  j["id"] = r.id;
  j["command"] = c.command;
  j["pass"] = r.pass;
  j["margin"] = r.margin;
  j["report"] = r.body;
  j["config"] = to_json(c);
  return j;
}

struct Summary {
  std::size_t total = 0;
  std::size_t passed = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_id;
  std::vector<std::string> fail_ids;
};

inline Summary summarise(const std::vector<ReportRecord>& records) {
  Summary s;
  for (const ReportRecord& r : records) {
    ++s.total;
    if (r.pass)
      ++s.passed;
    else
      s.fail_ids.push_back(r.id);
    if (r.margin < s.worst_margin) {
      s.worst_margin = r.margin;
      s.worst_id = r.id;
    }
  }
  return s;
}

inline ordered_json summary_json(const Summary& s, const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["total"] = s.total;
  j["passed"] = s.passed;
  j["failed"] = s.total - s.passed;
  j["worst_margin"] = s.total ? ordered_json(s.worst_margin) : ordered_json(nullptr);
  j["worst_id"] = s.worst_id;
  j["fail_ids"] = s.fail_ids;
  j["config"] = to_json(c);
  return j;
}

namespace detail {

inline std::string csv_field(const nlohmann::json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace detail

inline void write_jsonl(std::ostream& os, const std::vector<ReportRecord>& records, const RunConfig& c) {
  for (const ReportRecord& r : records) os << record_json(r, c).dump() << '\n';
}

/// Header id,command,pass,margin, then the union of flattened body paths
/// (sorted), then config as one JSON field.
inline void write_csv(std::ostream& os, const std::vector<ReportRecord>& records, const RunConfig& c) {
  std::vector<nlohmann::json> flat;
  std::set<std::string> columns;
  for (const ReportRecord& r : records) {
    flat.push_back(r.body.is_null() ? nlohmann::json::object() : r.body.flatten());
    for (const auto& [k, v] : flat.back().items()) columns.insert(k);
  }
  os << "id,command,pass,margin";
  for (const std::string& k : columns) os << ',' << detail::csv_field(k);
  os << ",config\n";
  const std::string config = detail::csv_field(to_json(c).dump());
  for (std::size_t i = 0; i < records.size(); ++i) {
    os << detail::csv_field(records[i].id) << ',' << detail::csv_field(c.command) << ','
       << (records[i].pass ? "true" : "false") << ',' << nlohmann::json(records[i].margin).dump();
    for (const std::string& k : columns) {
      os << ',';
      if (flat[i].contains(k)) os << detail::csv_field(flat[i][k]);
    }
    os << ',' << config << '\n';
  }
}

/// Writes <out>/<command>.jsonl (or .csv) and <out>/<command>_summary.json;
/// with an empty `out` the records go to `os`.
inline Summary emit_report(const std::vector<ReportRecord>& records, const RunConfig& c, std::ostream& os) {
  if (records.empty()) throw InvalidArgument("no reports to emit");
  if (c.format != "json" && c.format != "csv") throw InvalidArgument("format must be json or csv");
  const Summary s = summarise(records);
  auto write = [&](std::ostream& o) {
    if (c.format == "csv")
      write_csv(o, records, c);
    else
      write_jsonl(o, records, c);
  };
  if (c.out.empty()) {
    write(os);
    return s;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  const fs::path base = fs::path(c.out) / c.command;
  std::ofstream f(base.string() + (c.format == "csv" ? ".csv" : ".jsonl"), std::ios::binary);
  if (!f) throw InvalidArgument("cannot write report file under " + c.out);
  write(f);
  std::ofstream sf(base.string() + "_summary.json", std::ios::binary);
  if (!sf) throw InvalidArgument("cannot write summary file under " + c.out);
  sf << summary_json(s, c).dump(2) << '\n';
  if (!f || !sf) throw InvalidArgument("write failed under " + c.out);
  return s;
}

/// Extra plot data next to the reports: <out>/<command>_<name>.csv.
inline void write_side_file(const RunConfig& c, const std::string& name, const std::string& content) {
  if (c.out.empty()) return;
  std::filesystem::create_directories(c.out);
  std::ofstream f((std::filesystem::path(c.out) / (c.command + "_" + name + ".csv")).string(), std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + name + " under " + c.out);
  f << content;
}

}  // namespace monoweight
