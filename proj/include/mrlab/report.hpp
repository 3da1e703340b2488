#pragma once

// Study-result reporting: plot-ready CSV tables plus a JSON report carrying a
// config echo, a git-blob-style SHA-1 content hash of the CSV payload, and
// named pass/fail verdicts.  All number formatting is byte-deterministic so
// identical configuration + seed reproduces identical output files.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "mrlab/config.hpp"
#include "mrlab/maxreg.hpp"
#include "mrlab/studies.hpp"

namespace mrlab {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Deterministic scalar formatting.
// ---------------------------------------------------------------------------

/// Shortest representation that round-trips a double exactly (17 significant
/// digits); non-finite values spelled out so CSV cells never contain locale
/// surprises.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON cannot carry inf/nan; encode them as strings, finite values natively.
inline Json json_real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

// ---------------------------------------------------------------------------
// Content hashing (same construction as `git hash-object`).
// ---------------------------------------------------------------------------

inline std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("git_blob_sha1: digest failure");
  static const char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV tables.
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += cells[i];
      }
      out.push_back('\n');
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
  }
};

inline std::string format_flag(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------------------
// Study report: CSV + JSON row mirror + named verdicts.
// ---------------------------------------------------------------------------

struct StudyReport {
  std::string kind;
  CsvTable csv;
  Json rows = Json::array();     // native-typed mirror of the CSV rows
  Json summary = Json::object(); // table-level scalars
  std::vector<std::pair<std::string, bool>> verdicts;

  void verdict(const std::string& name, bool ok) { verdicts.emplace_back(name, ok); }
  bool pass() const {
    for (const auto& [name, ok] : verdicts)
      if (!ok) return false;
    return true;
  }
};

inline StudyReport report_of(const MmsTable& t, double div_tol = 1e-9) {
  StudyReport r;
  r.kind = "mms";
  r.csv.header = {"phase", "n", "dt", "error"};
  auto push = [&r](const char* phase, const MmsRow& row) {
    r.csv.rows.push_back({phase, std::to_string(row.n), format_real(row.dt), format_real(row.error)});
    r.rows.push_back({{"phase", phase}, {"n", row.n}, {"dt", row.dt}, {"error", json_real(row.error)}});
  };
  for (const auto& row : t.spatial) push("spatial", row);
  for (const auto& row : t.temporal) push("temporal", row);
  r.summary["spatial_order"] = json_real(t.spatial_order);
  r.summary["temporal_order"] = json_real(t.temporal_order);
  r.summary["spatial_ratios"] = Json::array();
  for (double v : t.spatial_ratios) r.summary["spatial_ratios"].push_back(json_real(v));
  r.summary["temporal_ratios"] = Json::array();
  for (double v : t.temporal_ratios) r.summary["temporal_ratios"].push_back(json_real(v));
  r.summary["initial_error"] = json_real(t.initial_error);
  r.summary["max_divergence"] = json_real(t.max_divergence);
  r.summary["spatial_threshold"] = t.spatial_threshold;
  r.summary["temporal_threshold"] = t.temporal_threshold;
  r.verdict("spatial_order_ok", t.spatial_order >= t.spatial_threshold);
  r.verdict("temporal_order_ok", t.temporal_order >= t.temporal_threshold);
  r.verdict("divergence_ok", t.max_divergence <= div_tol);
  return r;
}

inline StudyReport report_of(const ConvergenceTable& t, bool assert_slope = true,
                             double slope_min = 0.8, double slope_max = 1.2,
                             double div_tol = 1e-9) {
  StudyReport r;
  r.kind = "limit";
  r.csv.header = {"n",      "eta",          "data_gap", "e1_gap",  "sup_gap",
                  "pressure_gap", "op_gap", "f_gap",    "blew_up", "at_floor"};
  for (const auto& row : t.rows) {
    r.csv.rows.push_back({std::to_string(row.n), format_real(row.eta_n),
                          format_real(row.data_gap), format_real(row.e1_gap),
                          format_real(row.sup_gap), format_real(row.pressure_gap),
                          format_real(row.op_gap), format_real(row.f_gap),
                          format_flag(row.blew_up), format_flag(row.at_floor)});
    r.rows.push_back({{"n", row.n},
                      {"eta", row.eta_n},
                      {"data_gap", json_real(row.data_gap)},
                      {"e1_gap", json_real(row.e1_gap)},
                      {"sup_gap", json_real(row.sup_gap)},
                      {"pressure_gap", json_real(row.pressure_gap)},
                      {"op_gap", json_real(row.op_gap)},
                      {"f_gap", json_real(row.f_gap)},
                      {"blew_up", row.blew_up},
                      {"at_floor", row.at_floor}});
  }
  r.summary["floor_estimate"] = json_real(t.floor_estimate);
  r.summary["slope"] = json_real(t.slope);
  r.summary["fitted_rows"] = t.fitted_rows;
  r.summary["monotone_to_floor"] = t.monotone_to_floor;
  r.summary["strict_to_floor"] = t.strict_to_floor;
  r.summary["pressure_c"] = json_real(t.pressure_c);
  r.summary["pressure_dominated"] = t.pressure_dominated;
  r.summary["max_divergence"] = json_real(t.max_divergence);
  r.verdict("monotone_to_floor", t.monotone_to_floor);
  r.verdict("divergence_ok", t.max_divergence <= div_tol);
  if (assert_slope)
    r.verdict("slope_in_band",
              t.fitted_rows >= 2 && t.slope >= slope_min && t.slope <= slope_max);
  return r;
}

inline StudyReport report_of(const DependenceTable& t, double ratio_band = 2.0) {
  StudyReport r;
  r.kind = "depend";
  r.csv.header = {"delta", "data_gap", "op_gap", "f_gap", "e1_gap", "driver_sum", "ratio", "blew_up"};
  double ratio_min = 0.0, ratio_max = 0.0;
  bool any_ratio = false, any_blowup = false;
  for (const auto& row : t.rows) {
    r.csv.rows.push_back({format_real(row.delta), format_real(row.data_gap),
                          format_real(row.op_gap), format_real(row.f_gap),
                          format_real(row.e1_gap), format_real(row.driver_sum),
                          format_real(row.ratio), format_flag(row.blew_up)});
    r.rows.push_back({{"delta", row.delta},
                      {"data_gap", json_real(row.data_gap)},
                      {"op_gap", json_real(row.op_gap)},
                      {"f_gap", json_real(row.f_gap)},
                      {"e1_gap", json_real(row.e1_gap)},
                      {"driver_sum", json_real(row.driver_sum)},
                      {"ratio", json_real(row.ratio)},
                      {"blew_up", row.blew_up}});
    any_blowup = any_blowup || row.blew_up;
    if (!row.blew_up && row.ratio > 0.0) {
      ratio_min = any_ratio ? std::min(ratio_min, row.ratio) : row.ratio;
      ratio_max = any_ratio ? std::max(ratio_max, row.ratio) : row.ratio;
      any_ratio = true;
    }
  }
  const double spread = any_ratio && ratio_min > 0.0 ? ratio_max / ratio_min : 1.0;
  r.summary["fitted_c"] = json_real(t.fitted_c);
  r.summary["slope"] = json_real(t.slope);
  r.summary["fitted_rows"] = t.fitted_rows;
  r.summary["ratio_spread"] = json_real(spread);
  r.summary["sampled_lipschitz_A"] = json_real(t.sampled_lipschitz_A);
  r.summary["sampled_lipschitz_f"] = json_real(t.sampled_lipschitz_f);
  r.verdict("ratio_stable", spread < ratio_band);
  r.verdict("gap_vanishes", t.gap_vanishes);
  r.verdict("no_blowup", !any_blowup);
  return r;
}

inline StudyReport report_of(const BlowupTable& t) {
  StudyReport r;
  r.kind = "blowup";
  r.csv.header = {"n", "u0_norm", "T_n", "blew_up"};
  for (const auto& row : t.rows) {
    r.csv.rows.push_back({format_real(row.n), format_real(row.u0_norm), format_real(row.T_n),
                          format_flag(row.blew_up)});
    r.rows.push_back({{"n", row.n},
                      {"u0_norm", json_real(row.u0_norm)},
                      {"T_n", json_real(row.T_n)},
                      {"blew_up", row.blew_up}});
  }
  r.summary["T_limit"] = json_real(t.T_limit);
  r.summary["limit_blew_up"] = t.limit_blew_up;
  r.summary["tail_max"] = json_real(t.tail_max);
  r.summary["dt"] = json_real(t.dt);
  r.summary["inconclusive"] = t.inconclusive;
  r.verdict("limsup_inequality_ok", t.inequality_ok);
  return r;
}

inline StudyReport report_of(const MonotonicityScan& s) {
  StudyReport r;
  r.kind = "maxreg_interval_scan";
  r.csv.header = {"t", "cM", "probes", "seed"};
  for (const auto& row : s.rows) {
    r.csv.rows.push_back({format_real(row.T), format_real(row.value),
                          std::to_string(s.probes), std::to_string(s.seed)});
    r.rows.push_back({{"t", row.T}, {"cM", json_real(row.value)}, {"probes", s.probes}, {"seed", s.seed}});
  }
  r.summary["tolerance"] = s.tolerance;
  r.summary["probes"] = s.probes;
  r.summary["seed"] = s.seed;
  r.verdict("non_decreasing", s.non_decreasing);
  return r;
}

inline StudyReport report_of(const ContinuityScan& s) {
  StudyReport r;
  r.kind = "maxreg_family_scan";
  r.csv.header = {"t", "u", "cM", "probes", "seed"};
  for (const auto& row : s.rows) {
    r.csv.rows.push_back({format_real(row.t), format_real(row.u), format_real(row.value),
                          std::to_string(s.probes), std::to_string(s.seed)});
    r.rows.push_back({{"t", row.t},
                      {"u", row.u},
                      {"cM", json_real(row.value)},
                      {"noise", json_real(row.noise)},
                      {"probes", s.probes},
                      {"seed", s.seed}});
  }
  r.summary["kappa"] = json_real(s.kappa);
  r.summary["grid_max"] = json_real(s.grid_max);
  r.summary["n_seeds"] = s.n_seeds;
  r.summary["probes"] = s.probes;
  r.summary["seed"] = s.seed;
  r.verdict("kappa_finite", std::isfinite(s.kappa));
  r.verdict("grid_max_finite", std::isfinite(s.grid_max) && s.grid_max > 0.0);
  r.verdict("modulus_ok", s.modulus_ok);
  return r;
}

// ---------------------------------------------------------------------------
// File emission.
// ---------------------------------------------------------------------------

struct ReportPaths {
  std::string csv_path;
  std::string json_path;
  std::string content_hash;
  bool pass = false;
};

namespace detail {
inline std::string strip_report_suffix(std::string stem) {
  for (const char* suffix : {".csv", ".json"}) {
    const std::string s(suffix);
    if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0)
      return stem.substr(0, stem.size() - s.size());
  }
  return stem;
}
}  // namespace detail

/// Writes `<stem>.csv` and `<stem>.json`; the JSON mirrors the CSV rows and
/// adds config echo, content hash, and verdicts.  A trailing `.csv`/`.json`
/// on the stem is tolerated and stripped.
inline ReportPaths write_report(const StudyReport& report, const Config& config,
                                unsigned long long seed, int threads,
                                const std::string& out_stem) {
  const std::string stem = detail::strip_report_suffix(out_stem);
  const std::string csv_text = report.csv.to_string();

  ReportPaths paths;
  paths.csv_path = stem + ".csv";
  paths.json_path = stem + ".json";
  paths.content_hash = git_blob_sha1(csv_text);
  paths.pass = report.pass();

  Json doc;
  doc["tool"] = "mrlab";
  doc["kind"] = report.kind;
  doc["seed"] = seed;
  doc["threads"] = threads;
  Json echo = Json::object();
  for (const auto& [k, v] : config.entries()) echo[k] = v;
  doc["config"] = echo;
  doc["content_hash"] = paths.content_hash;
  doc["rows"] = report.rows;
  doc["summary"] = report.summary;
  Json verdicts = Json::object();
  for (const auto& [name, ok] : report.verdicts) verdicts[name] = ok;
  doc["verdicts"] = verdicts;
  doc["pass"] = report.pass();

  {
    std::ofstream out(paths.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_report: cannot open " + paths.csv_path);
    out << csv_text;
  }
  {
    std::ofstream out(paths.json_path, std::ios::binary);
    if (!out) throw std::runtime_error("write_report: cannot open " + paths.json_path);
    out << doc.dump(2) << '\n';
  }
  return paths;
}

}  // namespace mrlab
