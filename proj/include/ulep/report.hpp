#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ulep/common.hpp"
#include "ulep/config.hpp"
#include "ulep/grids.hpp"
#include "ulep/harness.hpp"
#include "ulep/kde.hpp"
#include "ulep/selectors.hpp"

namespace ulep {

using ordered_json = nlohmann::ordered_json;

inline std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  std::tm g{};
  gmtime_r(&t, &g);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &g);
  return buf;
}

/// Envelope around every emitted payload. Timestamp and wall time live here,
/// outside the payload, so payload bytes can be compared across reruns.
inline ordered_json make_envelope(const std::string& subcommand, std::uint64_t seed,
                                  const Config& cfg, ordered_json payload, double wall_time_s) {
  ordered_json env;
  env["tool"] = "ulep";
  env["version"] = kVersion;
  env["subcommand"] = subcommand;
  env["seed"] = seed;
  env["timestamp"] = iso8601_now();
  env["wall_time_s"] = wall_time_s;
  ordered_json cfg_obj = ordered_json::object();
  for (const auto& [k, v] : cfg.entries()) cfg_obj[k] = v;
  env["config"] = std::move(cfg_obj);
  env["payload"] = std::move(payload);
  return env;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoFailure("write failed: " + path);
}

inline void write_json_file(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---- CSV emission ----------------------------------------------------------

struct CsvTable {
  std::string name;  // suffix for the output file
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
inline std::string csv_cell(long long v) { return std::to_string(v); }
inline std::string csv_cell(bool v) { return v ? "true" : "false"; }

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::string text;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    text += (i ? "," : "") + t.header[i];
  text += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
    text += "\n";
  }
  write_text_file(path, text);
}

// ---- payload builders ------------------------------------------------------

inline ordered_json payload_of(const BandwidthGrid& g) {
  ordered_json j;
  j["h_lo"] = g.h_lo;
  j["h_hi"] = g.h_hi;
  j["rho"] = g.rho;
  j["R"] = g.R;
  j["merged_endpoint"] = g.merged_endpoint;
  j["levels"] = g.levels;
  return j;
}

inline ordered_json payload_of(const KdeEstimate& e) {
  ordered_json j;
  j["value"] = e.value;
  j["n"] = e.n;
  j["h"] = e.h;
  j["z"] = e.z;
  j["kernel"] = e.kernel_label;
  return j;
}

inline ordered_json payload_of(const ConfidenceBand& b) {
  ordered_json j;
  j["center"] = payload_of(b.center);
  j["f_z"] = b.f_z;
  j["half_width"] = b.half_width;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["level"] = b.level;
  return j;
}

inline ordered_json payload_of(const SelectorResult& s) {
  ordered_json j;
  j["method"] = s.method;
  j["h_star"] = s.h_star;
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : s.diagnostics) diag[k] = v;
  j["diagnostics"] = std::move(diag);
  return j;
}

inline ordered_json payload_of(const BandwidthRatioReport& r) {
  ordered_json j;
  j["c_lo"] = r.c_lo;
  j["c_hi"] = r.c_hi;
  j["pass"] = r.pass;
  j["witness"] = r.witness;
  ordered_json entries = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json je;
    je["n"] = e.n;
    je["h"] = e.h;
    je["ratio"] = e.ratio;
    je["valid"] = e.valid;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline ordered_json payload_of(const StudyReport& r) {
  ordered_json j;
  j["study"] = r.study;
  j["seed"] = r.seed;
  ordered_json notes = ordered_json::object();
  for (const auto& [k, v] : r.notes) notes[k] = v;
  j["notes"] = std::move(notes);
  ordered_json tables = ordered_json::array();
  for (const StatTable& t : r.tables) {
    ordered_json jt;
    jt["name"] = t.name;
    jt["has_target"] = t.has_target;
    if (t.has_target) jt["target"] = t.target;
    jt["trend_on_gap"] = t.trend_on_gap;
    ordered_json levels = ordered_json::array();
    for (std::size_t i = 0; i < t.summaries.size(); ++i) {
      const LevelSummary& s = t.summaries[i];
      ordered_json jl;
      jl["n"] = s.n;
      jl["reps"] = s.reps;
      jl["mean"] = s.mean;
      jl["median"] = s.median;
      jl["q25"] = s.q25;
      jl["q75"] = s.q75;
      jl["se_median"] = s.se_median;
      jl["values"] = t.values[i];
      levels.push_back(std::move(jl));
    }
    jt["levels"] = std::move(levels);
    ordered_json jt_trend;
    jt_trend["monotone_within_slack"] = t.trend.monotone_within_slack;
    jt_trend["final_below_initial"] = t.trend.final_below_initial;
    jt_trend["detail"] = t.trend.detail;
    jt["trend"] = std::move(jt_trend);
    tables.push_back(std::move(jt));
  }
  j["tables"] = std::move(tables);
  return j;
}

inline ordered_json payload_of(const ChernoffReport& r) {
  ordered_json j;
  j["all_hold"] = r.all_hold;
  j["max_rel_gap"] = r.max_rel_gap;
  ordered_json rows = ordered_json::array();
  for (const ChernoffRow& row : r.rows) {
    ordered_json jr;
    jr["n"] = row.n;
    jr["exact"] = row.exact;
    jr["alt"] = row.alt;
    jr["bound"] = row.bound;
    jr["rel_gap"] = row.rel_gap;
    jr["holds"] = row.holds;
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline ordered_json payload_of(const ConcentrationReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["replications"] = r.replications;
  j["c"] = r.c;
  j["tau"] = r.tau;
  j["seed"] = r.seed;
  j["h_levels"] = r.h_levels;
  j["ratios"] = r.ratios;
  ordered_json cells = ordered_json::array();
  for (std::size_t l = 0; l < r.h_levels.size(); ++l)
    for (std::size_t ri = 0; ri < r.ratios.size(); ++ri) {
      ordered_json jc;
      jc["h"] = r.h_levels[l];
      jc["ratio"] = r.ratios[ri];
      jc["threshold"] = r.thresholds[l][ri];
      jc["p_hat"] = r.p_hat[l][ri];
      jc["censored"] = static_cast<bool>(r.censored[l][ri]);
      cells.push_back(std::move(jc));
    }
  j["cells"] = std::move(cells);
  ordered_json fits = ordered_json::array();
  for (const ConcentrationFit& f : r.fits) {
    ordered_json jf;
    jf["ratio"] = f.ratio;
    jf["fitted"] = f.fitted;
    jf["slope"] = f.slope;
    jf["intercept"] = f.intercept;
    jf["r2"] = f.r2;
    jf["points_used"] = f.points_used;
    fits.push_back(std::move(jf));
  }
  j["fits"] = std::move(fits);
  j["slopes_all_negative"] = r.slopes_all_negative;
  j["spearman_defined"] = r.spearman_defined;
  j["spearman_r2_vs_negslope"] = r.spearman_r2_vs_negslope;
  return j;
}

inline ordered_json payload_of(const CoveringReport& r) {
  ordered_json j;
  j["m_probe"] = r.m_probe;
  j["seed"] = r.seed;
  j["eps"] = r.eps;
  j["n_hat"] = r.n_hat;
  j["chosen"] = r.chosen;
  j["dist"] = r.dist;
  j["fit_done"] = r.fit_done;
  if (r.fit_done) {
    ordered_json jf;
    jf["v_hat"] = r.v_hat;
    jf["intercept"] = r.fit.intercept;
    jf["r2"] = r.fit.r2;
    j["fit"] = std::move(jf);
  }
  j["has_declared"] = r.has_declared;
  if (r.has_declared) {
    j["c0"] = r.c0;
    j["v0"] = r.v0;
    j["declared_consistent"] = r.declared_consistent;
  }
  return j;
}

inline ordered_json payload_of(const PoissonizationReport& r) {
  ordered_json j;
  j["replications"] = r.replications;
  j["quantile"] = r.quantile;
  j["absolute_threshold"] = r.absolute_threshold;
  j["all_within"] = r.all_within;
  j["seed"] = r.seed;
  ordered_json rows = ordered_json::array();
  for (const PoissonizationRow& row : r.rows) {
    ordered_json jr;
    jr["n"] = row.n;
    jr["h"] = row.h;
    jr["threshold"] = row.threshold;
    jr["p_direct"] = row.p_direct;
    jr["p_poisson"] = row.p_poisson;
    jr["ratio"] = row.ratio;
    jr["se_ratio"] = row.se_ratio;
    jr["within"] = row.within;
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  return j;
}

// ---- companion CSV tables --------------------------------------------------

inline std::vector<CsvTable> csv_tables_of(const BandwidthGrid& g) {
  CsvTable t;
  t.name = "levels";
  t.header = {"index", "h"};
  for (std::size_t i = 0; i < g.levels.size(); ++i)
    t.rows.push_back({csv_cell(static_cast<long long>(i)), csv_cell(g.levels[i])});
  return {t};
}

inline std::vector<CsvTable> csv_tables_of(const StudyReport& r) {
  std::vector<CsvTable> out;
  for (const StatTable& t : r.tables) {
    CsvTable vals;
    vals.name = t.name + "_values";
    vals.header = {"n", "replication", "value"};
    for (std::size_t i = 0; i < t.values.size(); ++i)
      for (std::size_t rr = 0; rr < t.values[i].size(); ++rr)
        vals.rows.push_back({csv_cell(t.n_list[i]), csv_cell(static_cast<long long>(rr)),
                             csv_cell(t.values[i][rr])});
    out.push_back(std::move(vals));
    CsvTable summ;
    summ.name = t.name + "_summary";
    summ.header = {"n", "reps", "mean", "median", "q25", "q75", "se_median"};
    for (const LevelSummary& s : t.summaries)
      summ.rows.push_back({csv_cell(s.n), csv_cell(static_cast<long long>(s.reps)),
                           csv_cell(s.mean), csv_cell(s.median), csv_cell(s.q25),
                           csv_cell(s.q75), csv_cell(s.se_median)});
    out.push_back(std::move(summ));
  }
  return out;
}

inline std::vector<CsvTable> csv_tables_of(const ChernoffReport& r) {
  CsvTable t;
  t.name = "tails";
  t.header = {"n", "exact", "alt", "bound", "rel_gap", "holds"};
  for (const ChernoffRow& row : r.rows)
    t.rows.push_back({csv_cell(row.n), csv_cell(row.exact), csv_cell(row.alt),
                      csv_cell(row.bound), csv_cell(row.rel_gap), csv_cell(row.holds)});
  return {t};
}

inline std::vector<CsvTable> csv_tables_of(const ConcentrationReport& r) {
  CsvTable cells;
  cells.name = "cells";
  cells.header = {"h", "ratio", "threshold", "p_hat", "censored"};
  for (std::size_t l = 0; l < r.h_levels.size(); ++l)
    for (std::size_t ri = 0; ri < r.ratios.size(); ++ri)
      cells.rows.push_back({csv_cell(r.h_levels[l]), csv_cell(r.ratios[ri]),
                            csv_cell(r.thresholds[l][ri]), csv_cell(r.p_hat[l][ri]),
                            csv_cell(static_cast<bool>(r.censored[l][ri]))});
  CsvTable fits;
  fits.name = "fits";
  fits.header = {"ratio", "fitted", "slope", "intercept", "r2", "points_used"};
  for (const ConcentrationFit& f : r.fits)
    fits.rows.push_back({csv_cell(f.ratio), csv_cell(f.fitted), csv_cell(f.slope),
                         csv_cell(f.intercept), csv_cell(f.r2),
                         csv_cell(static_cast<long long>(f.points_used))});
  return {cells, fits};
}

inline std::vector<CsvTable> csv_tables_of(const CoveringReport& r) {
  CsvTable t;
  t.name = "packing";
  t.header = {"eps", "n_hat"};
  for (std::size_t i = 0; i < r.eps.size(); ++i)
    t.rows.push_back({csv_cell(r.eps[i]), csv_cell(r.n_hat[i])});
  return {t};
}

inline std::vector<CsvTable> csv_tables_of(const PoissonizationReport& r) {
  CsvTable t;
  t.name = "tails";
  t.header = {"n", "h", "threshold", "p_direct", "p_poisson", "ratio", "se_ratio", "within"};
  for (const PoissonizationRow& row : r.rows)
    t.rows.push_back({csv_cell(row.n), csv_cell(row.h), csv_cell(row.threshold),
                      csv_cell(row.p_direct), csv_cell(row.p_poisson), csv_cell(row.ratio),
                      csv_cell(row.se_ratio), csv_cell(row.within)});
  return {t};
}

/// Write the envelope JSON at <base>.json and each table at
/// <base>_<table>.csv.
inline void emit_report(const std::string& base, const ordered_json& envelope,
                        const std::vector<CsvTable>& tables) {
  write_json_file(base + ".json", envelope);
  for (const CsvTable& t : tables) write_csv_file(base + "_" + t.name + ".csv", t);
}

}  // namespace ulep
