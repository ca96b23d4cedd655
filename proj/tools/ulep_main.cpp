// Command-line harness around the ulep library.
//
// Subcommands:
//   grid       expand a geometric bandwidth grid
//   gn         evaluate the local empirical process at one point
//   kde        kernel density estimate at one point
//   band       pointwise confidence band over a list of anchors
//   selectors  data-driven bandwidth selectors (plus optional corridor check)
//   verify     Monte Carlo verification studies (seven named studies)
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "ulep/ulep.hpp"

namespace {

using ulep::Config;
using ulep::CsvTable;
using ulep::ordered_json;

struct CommonOpts {
  std::string config_path;
  std::string out_base;
  std::string data_path;
  std::uint64_t seed = 0;
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_threads, bool with_data) {
  cmd->add_option("--config", o.config_path, "configuration file (key = value lines)");
  cmd->add_option("--out", o.out_base, "output base path; writes BASE.json and BASE_<table>.csv");
  o.seed_opt = cmd->add_option("--seed", o.seed, "master seed; overrides study.seed from the config");
  if (with_threads)
    cmd->add_option("--threads", o.threads, "worker threads for replication loops")
        ->check(CLI::Range(1, 1024));
  if (with_data)
    cmd->add_option("--data", o.data_path, "sample CSV (one observation per row)");
}

void print_synopsis(std::ostream& os) {
  os << "usage: ulep <subcommand> [options]\n"
        "  grid --hlo H --hhi H --rho R [--out BASE]\n"
        "  gn | kde | band | selectors --config FILE [--data FILE] [--seed N] [--out BASE]\n"
        "  verify <thm1-i|thm1-ii|cor11|conc|chernoff|covering|poissonize>\n"
        "         [--config FILE] [--seed N] [--threads N] [--out BASE]\n";
}

struct Outputs {
  ordered_json payload;
  std::vector<CsvTable> tables;
};

// Loads the config, applies the seed override, times the body, and emits the
// enveloped result to stdout (and to files when --out was given).
int execute(const std::string& name, const CommonOpts& opts,
            const std::function<Outputs(Config&, std::uint64_t)>& body) {
  Config cfg = opts.config_path.empty() ? Config() : Config::load(opts.config_path);
  if (opts.seed_opt != nullptr && opts.seed_opt->count() > 0)
    cfg.set("study.seed", std::to_string(opts.seed));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("study.seed", 0));

  const auto t0 = std::chrono::steady_clock::now();
  Outputs out = body(cfg, seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const ordered_json envelope = ulep::make_envelope(name, seed, cfg, out.payload, wall);
  std::cout << envelope.dump(2) << "\n";
  if (!opts.out_base.empty()) ulep::emit_report(opts.out_base, envelope, out.tables);
  return 0;
}

// ---- sample resolution for the estimation subcommands ----------------------

ulep::Sample resolve_sample(const Config& cfg, const CommonOpts& opts, std::uint64_t seed) {
  if (!opts.data_path.empty()) return ulep::load_sample(opts.data_path);
  if (cfg.has("data.path")) return ulep::load_sample(cfg.get_string("data.path"));
  std::size_t n = cfg.get_size("data.simulate_n", 0);
  if (n == 0 && cfg.has("study.n")) {
    const std::vector<std::size_t> ns = cfg.get_sizes("study.n");
    if (!ns.empty()) n = ns.front();
  }
  if (n == 0)
    throw ulep::ConfigInvalid(
        "no data source: pass --data, or set data.path or data.simulate_n in the config");
  ulep::DensityModel model = ulep::density_from_config(cfg);
  ulep::Rng rng(ulep::derive_seed(seed, 0xda7aULL));
  return ulep::simulate(model, static_cast<int>(n), rng);
}

double resolve_bandwidth(const Config& cfg, const std::string& h_key,
                         const std::string& selector_key, const ulep::Sample& sample,
                         std::string* method_out) {
  if (cfg.has(h_key)) {
    if (method_out != nullptr) *method_out = "fixed";
    return cfg.get_double(h_key);
  }
  const std::string method = cfg.get_string(selector_key, "sheather_jones");
  ulep::SelectorResult sel;
  if (method == "silverman")
    sel = ulep::silverman(sample);
  else if (method == "sheather_jones")
    sel = ulep::sheather_jones(sample);
  else
    throw ulep::ConfigInvalid("unknown bandwidth selector: " + method);
  if (method_out != nullptr) *method_out = method;
  return sel.h_star;
}

ulep::Point point_from_config(const Config& cfg, const std::string& key) {
  return cfg.get_doubles(key);
}

// ---- plain subcommand bodies -----------------------------------------------

Outputs run_grid(Config& cfg, double h_lo, double h_hi, double rho) {
  cfg.set_double("grid.h_lo", h_lo);
  cfg.set_double("grid.h_hi", h_hi);
  cfg.set_double("grid.rho", rho);
  const ulep::BandwidthGrid grid = ulep::make_bandwidth_grid(h_lo, h_hi, rho);
  return {ulep::payload_of(grid), ulep::csv_tables_of(grid)};
}

Outputs run_gn(Config& cfg, const CommonOpts& opts, std::uint64_t seed) {
  const ulep::Sample sample = resolve_sample(cfg, opts, seed);
  const ulep::KernelFamily family = ulep::family_from_config(cfg);
  const ulep::DensityModel model = ulep::density_from_config(cfg);
  const double h = cfg.get_double("eval.h");
  const ulep::Point z = point_from_config(cfg, "eval.z");
  const bool normalized = cfg.get_bool("eval.normalized", false);

  const ulep::ProcessEvaluation ev = ulep::eval_process(sample, family, h, z, model, normalized);

  ordered_json payload;
  payload["n"] = ev.n;
  payload["h"] = ev.h;
  payload["z"] = ev.z;
  payload["normalized"] = ev.normalized;
  ordered_json rows = ordered_json::array();
  CsvTable table{"values", {"kernel", "value"}, {}};
  for (int i = 0; i < family.size(); ++i) {
    ordered_json row;
    row["kernel"] = family.at(i).label();
    row["value"] = ev.values[static_cast<std::size_t>(i)];
    rows.push_back(std::move(row));
    table.rows.push_back({family.at(i).label(), ulep::csv_cell(ev.values[static_cast<std::size_t>(i)])});
  }
  payload["values"] = std::move(rows);
  return {std::move(payload), {std::move(table)}};
}

Outputs run_kde(Config& cfg, const CommonOpts& opts, std::uint64_t seed) {
  const ulep::Sample sample = resolve_sample(cfg, opts, seed);
  const ulep::Kernel k = ulep::kernel_from_config(cfg);
  std::string method;
  const double h = resolve_bandwidth(cfg, "kde.h", "kde.selector", sample, &method);
  const ulep::Point z = point_from_config(cfg, "eval.z");

  const ulep::KdeEstimate est = ulep::kde(sample, k, h, z);
  ordered_json payload = ulep::payload_of(est);
  payload["bandwidth_method"] = method;

  CsvTable table{"estimate", {"z", "h", "n", "value", "bandwidth_method"}, {}};
  std::string z_text;
  for (std::size_t i = 0; i < z.size(); ++i)
    z_text += (i ? ";" : "") + ulep::csv_cell(z[i]);
  table.rows.push_back({z_text, ulep::csv_cell(h), ulep::csv_cell(static_cast<long long>(est.n)),
                        ulep::csv_cell(est.value), method});
  return {std::move(payload), {std::move(table)}};
}

Outputs run_band(Config& cfg, const CommonOpts& opts, std::uint64_t seed) {
  const ulep::Sample sample = resolve_sample(cfg, opts, seed);
  const ulep::Kernel k = ulep::kernel_from_config(cfg);
  std::string method;
  const double h = resolve_bandwidth(cfg, "band.h", "band.selector", sample, &method);
  const std::vector<std::vector<double>> anchors =
      ulep::parse_anchor_list(cfg.get_string("band.z"));

  const std::string mode =
      cfg.get_string("band.mode", cfg.has("density.kind") ? "simulation" : "plugin");
  std::string f_source;
  std::function<double(const ulep::Point&)> f_of;
  if (mode == "simulation") {
    auto model = std::make_shared<ulep::DensityModel>(ulep::density_from_config(cfg));
    f_source = "model pdf (" + model->describe() + ")";
    f_of = [model](const ulep::Point& z) { return model->pdf(z); };
  } else if (mode == "plugin") {
    std::string pilot_method;
    const double pilot =
        resolve_bandwidth(cfg, "band.pilot_h", "band.pilot_selector", sample, &pilot_method);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "plugin kde (%s pilot, h=%.6g)", pilot_method.c_str(), pilot);
    f_source = buf;
    f_of = [&sample, &k, pilot](const ulep::Point& z) {
      return ulep::kde(sample, k, pilot, z).value;
    };
  } else {
    throw ulep::ConfigInvalid("band.mode must be 'simulation' or 'plugin'");
  }

  ordered_json payload;
  payload["mode"] = mode;
  payload["f_source"] = f_source;
  payload["h"] = h;
  payload["bandwidth_method"] = method;
  payload["kernel"] = k.label();
  ordered_json points = ordered_json::array();
  CsvTable table{"band", {"z", "center", "f_z", "half_width", "lower", "upper"}, {}};
  for (const auto& z : anchors) {
    const ulep::KdeEstimate est = ulep::kde(sample, k, h, z);
    const double f_z = f_of(z);
    const ulep::ConfidenceBand band = ulep::confidence_band(est, f_z, k);
    points.push_back(ulep::payload_of(band));
    std::string z_text;
    for (std::size_t i = 0; i < z.size(); ++i)
      z_text += (i ? ";" : "") + ulep::csv_cell(z[i]);
    table.rows.push_back({z_text, ulep::csv_cell(band.center.value), ulep::csv_cell(band.f_z),
                          ulep::csv_cell(band.half_width), ulep::csv_cell(band.lower),
                          ulep::csv_cell(band.upper)});
  }
  payload["points"] = std::move(points);
  return {std::move(payload), {std::move(table)}};
}

Outputs run_selectors(Config& cfg, const CommonOpts& opts, std::uint64_t seed) {
  const ulep::Sample sample = resolve_sample(cfg, opts, seed);

  ordered_json results = ordered_json::array();
  CsvTable table{"selectors", {"method", "h_star"}, {}};
  const auto record = [&](const char* name, ulep::SelectorResult (*fn)(const ulep::Sample&)) {
    try {
      const ulep::SelectorResult r = fn(sample);
      results.push_back(ulep::payload_of(r));
      table.rows.push_back({r.method, ulep::csv_cell(r.h_star)});
    } catch (const ulep::Error& e) {
      ordered_json row;
      row["method"] = name;
      row["error"] = e.what();
      results.push_back(std::move(row));
    }
  };
  record("silverman", +[](const ulep::Sample& s) { return ulep::silverman(s); });
  record("sheather_jones", +[](const ulep::Sample& s) { return ulep::sheather_jones(s); });

  ordered_json payload;
  payload["n"] = sample.n();
  payload["results"] = std::move(results);
  std::vector<CsvTable> tables{std::move(table)};

  // Optional corridor check: h*(n) should behave like n^{-a} with a inside
  // (c_lo, c_hi), estimated over simulated samples of the configured sizes.
  if (cfg.has("selector.c_lo") && cfg.has("selector.c_hi")) {
    const double c_lo = cfg.get_double("selector.c_lo");
    const double c_hi = cfg.get_double("selector.c_hi");
    const std::string method = cfg.get_string("selector.method", "sheather_jones");
    const ulep::DensityModel model = ulep::density_from_config(cfg);
    std::vector<std::pair<std::size_t, double>> pairs;
    const std::vector<std::size_t> ns = cfg.get_sizes("study.n");
    for (std::size_t i = 0; i < ns.size(); ++i) {
      ulep::Rng rng(ulep::derive_seed(seed, 0x5e1eULL, i));
      const ulep::Sample s = ulep::simulate(model, static_cast<int>(ns[i]), rng);
      const double h =
          method == "silverman" ? ulep::silverman(s).h_star : ulep::sheather_jones(s).h_star;
      pairs.emplace_back(ns[i], h);
    }
    const ulep::BandwidthRatioReport check = ulep::random_bandwidth_check(pairs, c_lo, c_hi);
    payload["corridor"] = ulep::payload_of(check);
    CsvTable corridor{"corridor", {"n", "h", "ratio", "valid"}, {}};
    for (const auto& e : check.entries)
      corridor.rows.push_back({ulep::csv_cell(static_cast<long long>(e.n)), ulep::csv_cell(e.h),
                               ulep::csv_cell(e.ratio), ulep::csv_cell(e.valid)});
    tables.push_back(std::move(corridor));
  }
  return {std::move(payload), std::move(tables)};
}

// ---- verification studies --------------------------------------------------

ulep::ExperimentConfig experiment_for(const Config& cfg, const CommonOpts& opts) {
  ulep::ExperimentConfig ec = ulep::experiment_from_config(cfg);
  ec.threads = opts.threads;
  return ec;
}

Outputs run_verify_thm1_i(Config& cfg, const CommonOpts& opts) {
  const ulep::StudyReport r = ulep::run_thm1_i(experiment_for(cfg, opts));
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_thm1_ii(Config& cfg, const CommonOpts& opts) {
  const ulep::ExperimentConfig ec = experiment_for(cfg, opts);
  Eigen::VectorXd target;
  if (cfg.has("thm1ii.target")) {
    const std::vector<double> v = cfg.get_doubles("thm1ii.target");
    target = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    const ulep::GramEllipsoid ball(ulep::gram(ec.family));
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(ball.p());
    if (cfg.has("thm1ii.direction")) {
      const std::vector<double> d = cfg.get_doubles("thm1ii.direction");
      if (static_cast<int>(d.size()) != ball.p())
        throw ulep::ConfigInvalid("thm1ii.direction must have one entry per family member");
      direction = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    } else {
      direction(0) = 1.0;
    }
    target = ball.extreme_point(direction);
  }
  const ulep::StudyReport r = ulep::run_thm1_ii(ec, target);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_cor11(Config& cfg, const CommonOpts& opts) {
  const ulep::ExperimentConfig ec = experiment_for(cfg, opts);
  const ulep::Kernel k = ulep::kernel_from_config(cfg);
  const ulep::StudyReport r = ulep::run_cor11(ec, k);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_conc(Config& cfg, const CommonOpts& opts) {
  const ulep::ExperimentConfig ec = experiment_for(cfg, opts);
  const std::vector<double> ratios = cfg.get_doubles("conc.ratios", {0.5, 1.0, 2.0});
  const double c = cfg.get_double("conc.c", 0.45);
  const ulep::ConcentrationReport r = ulep::run_concentration(ec, ratios, c);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_chernoff(Config& cfg, const std::string& n_text) {
  std::vector<long long> ns;
  if (!n_text.empty()) {
    cfg.set("chernoff.n", n_text);
  }
  if (cfg.has("chernoff.n")) {
    for (std::size_t v : cfg.get_sizes("chernoff.n")) ns.push_back(static_cast<long long>(v));
  } else {
    for (long long n = 1; n <= 200; ++n) ns.push_back(n);
  }
  const ulep::ChernoffReport r = ulep::chernoff_check(ns);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_covering(Config& cfg, std::uint64_t seed) {
  const ulep::KernelFamily family = ulep::family_from_config(cfg);
  const ulep::DensityModel probe = ulep::density_from_config(cfg);
  const std::vector<double> eps = cfg.get_doubles("covering.eps", {0.2, 0.3, 0.5});
  const int m_probe = static_cast<int>(cfg.get_size("covering.m_probe", 20000));
  std::optional<std::pair<double, double>> declared;
  if (cfg.has("covering.c0") && cfg.has("covering.v0"))
    declared = std::make_pair(cfg.get_double("covering.c0"), cfg.get_double("covering.v0"));
  const ulep::CoveringReport r =
      ulep::estimate_covering(family, eps, probe, m_probe, seed, declared);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

Outputs run_verify_poissonize(Config& cfg, const CommonOpts& opts) {
  const ulep::ExperimentConfig ec = experiment_for(cfg, opts);
  const ulep::Kernel k = ulep::kernel_from_config(cfg);
  std::optional<double> threshold;
  if (cfg.has("poissonize.threshold")) threshold = cfg.get_double("poissonize.threshold");
  const double quantile = cfg.get_double("poissonize.quantile", 0.9);
  const ulep::PoissonizationReport r = ulep::poissonization_gap(ec, k, threshold, quantile);
  return {ulep::payload_of(r), ulep::csv_tables_of(r)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniform-in-bandwidth local empirical process toolkit"};
  app.require_subcommand(1);

  // grid
  CLI::App* grid_cmd = app.add_subcommand("grid", "expand a geometric bandwidth grid");
  CommonOpts grid_opts;
  double hlo = 0.0, hhi = 0.0, rho = 0.0;
  CLI::Option* hlo_opt = grid_cmd->add_option("--hlo", hlo, "smallest bandwidth");
  CLI::Option* hhi_opt = grid_cmd->add_option("--hhi", hhi, "largest bandwidth");
  CLI::Option* rho_opt = grid_cmd->add_option("--rho", rho, "geometric step, > 1");
  add_common(grid_cmd, grid_opts, /*with_threads=*/false, /*with_data=*/false);

  // estimation subcommands
  CLI::App* gn_cmd = app.add_subcommand("gn", "evaluate the local empirical process");
  CommonOpts gn_opts;
  add_common(gn_cmd, gn_opts, false, true);

  CLI::App* kde_cmd = app.add_subcommand("kde", "kernel density estimate at a point");
  CommonOpts kde_opts;
  add_common(kde_cmd, kde_opts, false, true);

  CLI::App* band_cmd = app.add_subcommand("band", "pointwise confidence band");
  CommonOpts band_opts;
  add_common(band_cmd, band_opts, false, true);

  CLI::App* sel_cmd = app.add_subcommand("selectors", "data-driven bandwidth selectors");
  CommonOpts sel_opts;
  add_common(sel_cmd, sel_opts, false, true);

  // verify with one nested subcommand per study
  CLI::App* verify_cmd = app.add_subcommand("verify", "Monte Carlo verification studies");
  verify_cmd->require_subcommand(1);
  struct Study {
    CLI::App* cmd = nullptr;
    CommonOpts opts;
  };
  std::vector<std::string> study_names = {"thm1-i",   "thm1-ii",  "cor11",    "conc",
                                          "chernoff", "covering", "poissonize"};
  std::vector<Study> studies(study_names.size());
  std::string chernoff_n_text;
  for (std::size_t i = 0; i < study_names.size(); ++i) {
    studies[i].cmd = verify_cmd->add_subcommand(study_names[i]);
    add_common(studies[i].cmd, studies[i].opts, /*with_threads=*/true, /*with_data=*/false);
    if (study_names[i] == "chernoff")
      studies[i].cmd->add_option("--n", chernoff_n_text, "comma-separated Poisson means");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    print_synopsis(std::cerr);
    return 2;
  }

  try {
    if (grid_cmd->parsed()) {
      // Flags win; the config supplies fallbacks; anything still missing is a
      // usage problem, not a runtime one.
      Config cfg =
          grid_opts.config_path.empty() ? Config() : Config::load(grid_opts.config_path);
      if (hlo_opt->count() == 0 && cfg.has("grid.h_lo")) hlo = cfg.get_double("grid.h_lo");
      else if (hlo_opt->count() == 0) { std::cerr << "grid: --hlo is required\n"; print_synopsis(std::cerr); return 2; }
      if (hhi_opt->count() == 0 && cfg.has("grid.h_hi")) hhi = cfg.get_double("grid.h_hi");
      else if (hhi_opt->count() == 0) { std::cerr << "grid: --hhi is required\n"; print_synopsis(std::cerr); return 2; }
      if (rho_opt->count() == 0 && cfg.has("grid.rho")) rho = cfg.get_double("grid.rho");
      else if (rho_opt->count() == 0) { std::cerr << "grid: --rho is required\n"; print_synopsis(std::cerr); return 2; }
      return execute("grid", grid_opts, [&](Config& c, std::uint64_t) {
        return run_grid(c, hlo, hhi, rho);
      });
    }
    if (gn_cmd->parsed())
      return execute("gn", gn_opts,
                     [&](Config& c, std::uint64_t s) { return run_gn(c, gn_opts, s); });
    if (kde_cmd->parsed())
      return execute("kde", kde_opts,
                     [&](Config& c, std::uint64_t s) { return run_kde(c, kde_opts, s); });
    if (band_cmd->parsed())
      return execute("band", band_opts,
                     [&](Config& c, std::uint64_t s) { return run_band(c, band_opts, s); });
    if (sel_cmd->parsed())
      return execute("selectors", sel_opts,
                     [&](Config& c, std::uint64_t s) { return run_selectors(c, sel_opts, s); });
    if (verify_cmd->parsed()) {
      for (std::size_t i = 0; i < studies.size(); ++i) {
        if (!studies[i].cmd->parsed()) continue;
        const std::string name = "verify " + study_names[i];
        const CommonOpts& o = studies[i].opts;
        if (study_names[i] == "thm1-i")
          return execute(name, o, [&](Config& c, std::uint64_t) { return run_verify_thm1_i(c, o); });
        if (study_names[i] == "thm1-ii")
          return execute(name, o, [&](Config& c, std::uint64_t) { return run_verify_thm1_ii(c, o); });
        if (study_names[i] == "cor11")
          return execute(name, o, [&](Config& c, std::uint64_t) { return run_verify_cor11(c, o); });
        if (study_names[i] == "conc")
          return execute(name, o, [&](Config& c, std::uint64_t) { return run_verify_conc(c, o); });
        if (study_names[i] == "chernoff")
          return execute(name, o,
                         [&](Config& c, std::uint64_t) { return run_verify_chernoff(c, chernoff_n_text); });
        if (study_names[i] == "covering")
          return execute(name, o, [&](Config& c, std::uint64_t s) { return run_verify_covering(c, s); });
        if (study_names[i] == "poissonize")
          return execute(name, o, [&](Config& c, std::uint64_t) { return run_verify_poissonize(c, o); });
      }
      std::cerr << "verify: unknown study\n";
      print_synopsis(std::cerr);
      return 2;
    }
    print_synopsis(std::cerr);
    return 2;
  } catch (const ulep::Error& e) {
    std::cerr << "ulep: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ulep: error: " << e.what() << "\n";
    return 1;
  }
}
