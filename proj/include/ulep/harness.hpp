#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/density.hpp"
#include "ulep/gram.hpp"
#include "ulep/grids.hpp"
#include "ulep/kernels.hpp"
#include "ulep/process.hpp"
#include "ulep/quadrature.hpp"
#include "ulep/rng.hpp"
#include "ulep/sample.hpp"
#include "ulep/stats.hpp"

namespace ulep {

/// Shared setup for the Monte-Carlo studies: data law, kernel family, the
/// spatial region swept by the window anchors, the power-law bandwidth
/// corridor [n^{-a_hi}, n^{-a_lo}], and discretization resolutions.
struct ExperimentConfig {
  DensityModel density;
  KernelFamily family;
  Box region;
  double a_lo = 0.3;
  double a_hi = 0.7;
  std::vector<long long> n_list;
  int replications = 1;
  double rho = 1.1;
  double delta = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;

  ExperimentConfig(DensityModel d, KernelFamily f, Box h)
      : density(std::move(d)), family(std::move(f)), region(std::move(h)) {}

  double bandwidth_floor(long long n) const {
    return std::pow(static_cast<double>(n), -a_hi);
  }
  double bandwidth_ceiling(long long n) const {
    return std::pow(static_cast<double>(n), -a_lo);
  }

  void validate() const {
    if (!(a_lo > 0.0 && a_lo < a_hi && a_hi < 1.0))
      throw ConfigInvalid("experiment: exponents must satisfy 0 < a_lo < a_hi < 1");
    if (replications < 1) throw ConfigInvalid("experiment: replications must be >= 1");
    if (n_list.empty()) throw ConfigInvalid("experiment: empty n list");
    long long prev = 1;
    for (long long n : n_list) {
      if (n <= prev)
        throw ConfigInvalid("experiment: n list must be strictly increasing starting at >= 2");
      if (n > std::numeric_limits<int>::max()) throw ConfigInvalid("experiment: n too large");
      if (!(bandwidth_ceiling(n) > 2.0 * bandwidth_floor(n)))
        throw ConfigInvalid(
            "experiment: bandwidth ceiling must exceed twice the floor at every n");
      prev = n;
    }
    if (!(rho > 1.0)) throw ConfigInvalid("experiment: rho must exceed 1");
    if (!(delta > 0.0)) throw ConfigInvalid("experiment: delta must be positive");
    if (density.dim() != family.dim() || region.dim() != family.dim())
      throw ConfigInvalid("experiment: density, family, and region dimensions differ");
  }
};

struct LevelSummary {
  long long n = 0;
  int reps = 0;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double se_median = 0.0;
};

struct TrendVerdict {
  bool monotone_within_slack = true;
  bool final_below_initial = false;
  std::string detail;
};

/// One statistic across the n list: raw replication values plus per-n
/// summaries and the monotone-trend verdict (on medians, or on the gap
/// |median - target| when trend_on_gap is set).
struct StatTable {
  std::string name;
  std::vector<long long> n_list;
  std::vector<std::vector<double>> values;
  std::vector<LevelSummary> summaries;
  TrendVerdict trend;
  bool has_target = false;
  double target = 0.0;
  bool trend_on_gap = false;
};

struct StudyReport {
  std::string study;
  std::uint64_t seed = 0;
  std::vector<StatTable> tables;
  std::vector<std::pair<std::string, std::string>> notes;
};

inline LevelSummary summarize_level(long long n, const std::vector<double>& v) {
  LevelSummary s;
  s.n = n;
  s.reps = static_cast<int>(v.size());
  s.mean = mean_of(v);
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_of(sorted, 0.5);
  s.q25 = quantile_of(sorted, 0.25);
  s.q75 = quantile_of(sorted, 0.75);
  s.se_median = se_median_of(v);
  return s;
}

/// Fill summaries and judge the trend: medians (or gaps to the target) must
/// not increase by more than twice the pooled standard error between
/// consecutive n levels.
inline void finalize_table(StatTable& t) {
  t.summaries.clear();
  for (std::size_t i = 0; i < t.values.size(); ++i)
    t.summaries.push_back(summarize_level(t.n_list[i], t.values[i]));
  std::vector<double> m(t.summaries.size()), se(t.summaries.size());
  for (std::size_t i = 0; i < t.summaries.size(); ++i) {
    m[i] = t.trend_on_gap ? std::abs(t.summaries[i].median - t.target) : t.summaries[i].median;
    se[i] = t.summaries[i].se_median;
  }
  TrendVerdict v;
  std::string seq;
  for (std::size_t i = 0; i < m.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", m[i]);
    seq += (i ? "," : "") + std::string(buf);
  }
  v.detail = (t.trend_on_gap ? "gap medians: " : "medians: ") + seq;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    double slack = 2.0 * std::sqrt(se[i] * se[i] + se[i + 1] * se[i + 1]);
    if (m[i + 1] > m[i] + slack) {
      v.monotone_within_slack = false;
      v.detail += "; rise beyond slack after level " + std::to_string(i);
      break;
    }
  }
  v.final_below_initial = !m.empty() && m.back() < m.front();
  t.trend = v;
}

/// Run body(0..total-1) on up to `threads` workers. Each index writes its
/// own result slot, so aggregation order never depends on the schedule.
inline void parallel_for(std::size_t total, int threads,
                         const std::function<void(std::size_t)>& body) {
  if (total == 0) return;
  std::size_t t = std::min<std::size_t>(std::max(threads, 1), total);
  if (t == 1) {
    for (std::size_t i = 0; i < total; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    try {
      for (std::size_t i = next.fetch_add(1); i < total && !failed.load(); i = next.fetch_add(1))
        body(i);
    } catch (...) {
      std::lock_guard<std::mutex> g(err_mu);
      if (!err) err = std::current_exception();
      failed.store(true);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

constexpr std::uint64_t kTagThm1i = 0x7431;
constexpr std::uint64_t kTagThm1ii = 0x7432;
constexpr std::uint64_t kTagCor11 = 0x6331;
constexpr std::uint64_t kTagConc = 0x636f;
constexpr std::uint64_t kTagCovering = 0x6376;
constexpr std::uint64_t kTagPoisson = 0x706f;

struct KernelMeta {
  const Kernel* k = nullptr;
  bool indicator = false;
  double ind_lo = 0.0, ind_hi = 0.0;    // d=1 indicator box in kernel coordinates
  double sup_lo = 0.0, sup_hi = 0.0;    // d=1 support extent in kernel coordinates
};

inline std::vector<KernelMeta> make_kernel_meta(const std::vector<const Kernel*>& ks) {
  std::vector<KernelMeta> meta;
  meta.reserve(ks.size());
  for (const Kernel* k : ks) {
    KernelMeta m;
    m.k = k;
    if (k->dim() == 1) {
      Box s = k->support();
      m.sup_lo = s.lo[0];
      m.sup_hi = s.hi[0];
      if (k->is_indicator()) {
        Box b = k->indicator_box();
        m.indicator = true;
        m.ind_lo = b.lo[0];
        m.ind_hi = b.hi[0];
      }
    }
    meta.push_back(m);
  }
  return meta;
}

/// Precomputed per-bandwidth-level geometry shared by every replication:
/// anchors, density values, normalizers, and window expectations.
struct LevelPlan {
  double h = 0.0;
  double side = 0.0;  // h^{1/d}
  long long count = 0;
  std::vector<double> anchors;       // count x d, row-major
  std::vector<double> f_z;           // per anchor
  std::vector<double> norm_den;      // per anchor: sqrt(2 f_z n h log(1/h))
  std::vector<double> expectations;  // count x p: E K_i over the window
};

inline std::vector<LevelPlan> build_level_plans(const DensityModel& density, const Box& region,
                                                const std::vector<const Kernel*>& kernels,
                                                long long n, double h_lo, double h_hi, double rho,
                                                double delta) {
  std::vector<LevelPlan> plans;
  BandwidthGrid bg = make_bandwidth_grid(h_lo, h_hi, rho);
  int d = region.dim();
  int p = static_cast<int>(kernels.size());
  std::vector<double> z(d);
  for (double h : bg.levels) {
    SpatialGrid sg = make_spatial_grid(region, delta, h);
    LevelPlan pl;
    pl.h = h;
    pl.side = std::pow(h, 1.0 / static_cast<double>(d));
    pl.count = sg.J;
    pl.anchors.resize(static_cast<std::size_t>(sg.J) * d);
    pl.f_z.resize(sg.J);
    pl.norm_den.resize(sg.J);
    pl.expectations.resize(static_cast<std::size_t>(sg.J) * p);
    double log_term = std::log(1.0 / h);
    for (long long j = 0; j < sg.J; ++j) {
      sg.anchor(j, z);
      std::copy(z.begin(), z.end(), pl.anchors.begin() + static_cast<std::size_t>(j) * d);
      double f = density.pdf(z);
      if (!(f > 0.0))
        throw ConfigInvalid("experiment: spatial anchor falls outside the positive-density region");
      pl.f_z[j] = f;
      pl.norm_den[j] = std::sqrt(2.0 * f * static_cast<double>(n) * h * log_term);
      for (int i = 0; i < p; ++i)
        pl.expectations[static_cast<std::size_t>(j) * p + i] =
            expected_window(density, *kernels[i], h, z);
    }
    plans.push_back(std::move(pl));
  }
  return plans;
}

/// Per-replication window sums. One dimension uses the sorted view (counts
/// for indicators, subrange evaluation otherwise); higher dimensions scan.
class WindowSums {
 public:
  WindowSums(const Sample& sample, const std::vector<KernelMeta>& meta)
      : sample_(&sample), meta_(&meta), d_(sample.dim()), u_(sample.dim()) {
    if (d_ == 1) sorted_.emplace(sample);
  }

  // Sum of K_i((Z - z)/c) over the sample; z points into an anchor row.
  double sum(const double* z, double c, int i) const {
    const KernelMeta& m = (*meta_)[i];
    if (d_ == 1) {
      if (m.indicator)
        return static_cast<double>(sorted_->count(z[0] + c * m.ind_lo, z[0] + c * m.ind_hi));
      auto [lo, hi] = sorted_->range(z[0] + c * m.sup_lo, z[0] + c * m.sup_hi);
      double acc = 0.0;
      for (std::size_t idx = lo; idx < hi; ++idx) {
        u_[0] = (sorted_->at(idx) - z[0]) / c;
        acc += (*m.k)(u_);
      }
      return acc;
    }
    double acc = 0.0;
    for (int r = 0; r < sample_->n(); ++r) {
      auto row = sample_->row(r);
      for (int a = 0; a < d_; ++a) u_[a] = (row[a] - z[a]) / c;
      acc += (*m.k)(u_);
    }
    return acc;
  }

 private:
  const Sample* sample_;
  const std::vector<KernelMeta>* meta_;
  int d_;
  std::optional<Sorted1d> sorted_;
  mutable std::vector<double> u_;
};

inline std::vector<const Kernel*> family_pointers(const KernelFamily& fam) {
  std::vector<const Kernel*> ks;
  ks.reserve(fam.size());
  for (int i = 0; i < fam.size(); ++i) ks.push_back(&fam.at(i));
  return ks;
}

}  // namespace detail

/// Study of the uniform-in-bandwidth set-convergence claim: per replication
/// the sup over the bandwidth net and spatial anchors of the sup-norm
/// distance from the normalized evaluation to the limit ball.
inline StudyReport run_thm1_i(const ExperimentConfig& cfg) {
  cfg.validate();
  GramEllipsoid ball = gram(cfg.family);
  std::vector<const Kernel*> kernels = detail::family_pointers(cfg.family);
  std::vector<detail::KernelMeta> meta = detail::make_kernel_meta(kernels);
  int p = static_cast<int>(kernels.size());
  std::uint64_t study_seed = derive_seed(cfg.seed, detail::kTagThm1i);

  StatTable table;
  table.name = "sup_distance";
  table.n_list = cfg.n_list;
  table.values.assign(cfg.n_list.size(), std::vector<double>(cfg.replications, 0.0));
  std::atomic<bool> dominated{true};

  for (std::size_t li = 0; li < cfg.n_list.size(); ++li) {
    long long n = cfg.n_list[li];
    std::vector<detail::LevelPlan> plans =
        detail::build_level_plans(cfg.density, cfg.region, kernels, n, cfg.bandwidth_floor(n),
                                  cfg.bandwidth_ceiling(n), cfg.rho, cfg.delta);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      Rng rng(derive_seed(study_seed, li, r));
      Sample sample = simulate(cfg.density, static_cast<int>(n), rng);
      detail::WindowSums sums(sample, meta);

      struct Cand {
        double ub;
        std::size_t off;
      };
      std::vector<double> ys;
      std::vector<Cand> cands;
      Eigen::VectorXd y(p);
      double max_norm = 0.0;
      for (const detail::LevelPlan& pl : plans) {
        for (long long j = 0; j < pl.count; ++j) {
          const double* z = pl.anchors.data() + static_cast<std::size_t>(j) * sample.dim();
          double den = pl.norm_den[j];
          for (int i = 0; i < p; ++i) {
            double g = sums.sum(z, pl.side, i) -
                       static_cast<double>(n) *
                           pl.expectations[static_cast<std::size_t>(j) * p + i];
            y[i] = g / den;
          }
          double norm_inf = y.cwiseAbs().maxCoeff();
          max_norm = std::max(max_norm, norm_inf);
          double rate = ball.rate(y);
          if (rate <= 1.0 + 1e-10) continue;  // inside the ball, distance 0
          double ub = std::isfinite(rate) ? norm_inf * (1.0 - 1.0 / std::sqrt(rate)) : norm_inf;
          cands.push_back({ub, ys.size()});
          ys.insert(ys.end(), y.data(), y.data() + p);
        }
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.ub != b.ub ? a.ub > b.ub : a.off < b.off;
      });
      double best = 0.0;
      for (const Cand& c : cands) {
        if (c.ub <= best) break;  // sorted: nothing later can improve
        for (int i = 0; i < p; ++i) y[i] = ys[c.off + i];
        if (auto v = ball.sup_distance_above(y, best)) best = *v;
      }
      if (best > max_norm + 1e-9) dominated.store(false);
      table.values[li][r] = best;
    });
  }
  finalize_table(table);

  StudyReport rep;
  rep.study = "thm1-i";
  rep.seed = cfg.seed;
  rep.notes.emplace_back("gram_rank", std::to_string(ball.rank()));
  rep.notes.emplace_back("distance_dominated_by_norm", dominated.load() ? "true" : "false");
  rep.tables.push_back(std::move(table));
  return rep;
}

/// Study of the attainability claim: per replication the max over the
/// bandwidth net of the min over anchors of the sup-norm gap between the
/// normalized evaluation and a fixed in-ball target.
inline StudyReport run_thm1_ii(const ExperimentConfig& cfg, const Eigen::VectorXd& target) {
  cfg.validate();
  GramEllipsoid ball = gram(cfg.family);
  if (target.size() != cfg.family.size())
    throw DimensionUnsupported("target length must match the family size");
  if (!ball.contains(target))
    throw TargetOutsideBall("target has rate above 1; it cannot be a limit shape");
  std::vector<const Kernel*> kernels = detail::family_pointers(cfg.family);
  std::vector<detail::KernelMeta> meta = detail::make_kernel_meta(kernels);
  int p = static_cast<int>(kernels.size());
  std::uint64_t study_seed = derive_seed(cfg.seed, detail::kTagThm1ii);

  StatTable table;
  table.name = "target_gap";
  table.n_list = cfg.n_list;
  table.values.assign(cfg.n_list.size(), std::vector<double>(cfg.replications, 0.0));

  for (std::size_t li = 0; li < cfg.n_list.size(); ++li) {
    long long n = cfg.n_list[li];
    std::vector<detail::LevelPlan> plans =
        detail::build_level_plans(cfg.density, cfg.region, kernels, n, cfg.bandwidth_floor(n),
                                  cfg.bandwidth_ceiling(n), cfg.rho, cfg.delta);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      Rng rng(derive_seed(study_seed, li, r));
      Sample sample = simulate(cfg.density, static_cast<int>(n), rng);
      detail::WindowSums sums(sample, meta);
      double worst_level = 0.0;
      for (const detail::LevelPlan& pl : plans) {
        double best_anchor = std::numeric_limits<double>::infinity();
        for (long long j = 0; j < pl.count; ++j) {
          const double* z = pl.anchors.data() + static_cast<std::size_t>(j) * sample.dim();
          double den = pl.norm_den[j];
          double gap = 0.0;
          for (int i = 0; i < p; ++i) {
            double g = sums.sum(z, pl.side, i) -
                       static_cast<double>(n) *
                           pl.expectations[static_cast<std::size_t>(j) * p + i];
            gap = std::max(gap, std::abs(g / den - target[i]));
            if (gap >= best_anchor) break;  // cannot improve this anchor
          }
          best_anchor = std::min(best_anchor, gap);
        }
        worst_level = std::max(worst_level, best_anchor);
      }
      table.values[li][r] = worst_level;
    });
  }
  finalize_table(table);

  StudyReport rep;
  rep.study = "thm1-ii";
  rep.seed = cfg.seed;
  rep.notes.emplace_back("target_rate", std::to_string(ball.rate(target)));
  rep.tables.push_back(std::move(table));
  return rep;
}

/// Study of the exact-constant law: per replication the sup and inf over
/// the net of the normalized deviation for one kernel; targets are the
/// positive and negative square roots of the kernel's L2 mass.
inline StudyReport run_cor11(const ExperimentConfig& cfg, const Kernel& k) {
  cfg.validate();
  if (k.dim() != cfg.region.dim())
    throw DimensionUnsupported("cor11: kernel dimension must match the region");
  std::vector<const Kernel*> kernels{&k};
  std::vector<detail::KernelMeta> meta = detail::make_kernel_meta(kernels);
  std::uint64_t study_seed = derive_seed(cfg.seed, detail::kTagCor11);
  double root_l2 = std::sqrt(l2_norm_sq(k));

  StatTable sup_table, inf_table;
  sup_table.name = "sup";
  inf_table.name = "inf";
  for (StatTable* t : {&sup_table, &inf_table}) {
    t->n_list = cfg.n_list;
    t->values.assign(cfg.n_list.size(), std::vector<double>(cfg.replications, 0.0));
    t->has_target = true;
    t->trend_on_gap = true;
  }
  sup_table.target = root_l2;
  inf_table.target = -root_l2;

  for (std::size_t li = 0; li < cfg.n_list.size(); ++li) {
    long long n = cfg.n_list[li];
    std::vector<detail::LevelPlan> plans =
        detail::build_level_plans(cfg.density, cfg.region, kernels, n, cfg.bandwidth_floor(n),
                                  cfg.bandwidth_ceiling(n), cfg.rho, cfg.delta);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      Rng rng(derive_seed(study_seed, li, r));
      Sample sample = simulate(cfg.density, static_cast<int>(n), rng);
      detail::WindowSums sums(sample, meta);
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (const detail::LevelPlan& pl : plans) {
        for (long long j = 0; j < pl.count; ++j) {
          const double* z = pl.anchors.data() + static_cast<std::size_t>(j) * sample.dim();
          double g = sums.sum(z, pl.side, 0) -
                     static_cast<double>(n) * pl.expectations[j];
          double v = g / pl.norm_den[j];
          hi = std::max(hi, v);
          lo = std::min(lo, v);
        }
      }
      sup_table.values[li][r] = hi;
      inf_table.values[li][r] = lo;
    });
  }
  finalize_table(sup_table);
  finalize_table(inf_table);

  StudyReport rep;
  rep.study = "cor11";
  rep.seed = cfg.seed;
  char root_buf[40];
  std::snprintf(root_buf, sizeof(root_buf), "%.17g", root_l2);
  rep.notes.emplace_back("kernel", k.label());
  rep.notes.emplace_back("root_l2", root_buf);
  rep.tables.push_back(std::move(sup_table));
  rep.tables.push_back(std::move(inf_table));
  return rep;
}

struct ConcentrationFit {
  double ratio = 0.0;
  bool fitted = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points_used = 0;
};

/// Tail-shape study: exceedance probabilities of the running sup of the
/// centered window sums against thresholds scaled by (1 + r) tau, fitted
/// as log p against log(1/h) per threshold ratio.
struct ConcentrationReport {
  long long n = 0;
  int replications = 0;
  double c = 0.0;
  double tau = 0.0;
  std::vector<double> h_levels;
  std::vector<double> ratios;
  std::vector<std::vector<double>> thresholds;  // [level][ratio]
  std::vector<std::vector<double>> p_hat;       // [level][ratio]
  std::vector<std::vector<bool>> censored;      // [level][ratio]
  std::vector<ConcentrationFit> fits;
  bool slopes_all_negative = false;
  bool spearman_defined = false;
  double spearman_r2_vs_negslope = 0.0;
  std::uint64_t seed = 0;
};

inline ConcentrationReport run_concentration(const ExperimentConfig& cfg,
                                             const std::vector<double>& ratios, double c) {
  cfg.validate();
  if (ratios.empty()) throw ConfigInvalid("concentration: need at least one threshold ratio");
  for (double r : ratios)
    if (!(r > 0.0)) throw ConfigInvalid("concentration: threshold ratios must be positive");
  if (!(c > 0.0)) throw ConfigInvalid("concentration: threshold scale must be positive");

  long long n = cfg.n_list.back();
  int d = cfg.region.dim();
  std::vector<const Kernel*> kernels = detail::family_pointers(cfg.family);
  int p = static_cast<int>(kernels.size());
  Point z0(d);
  for (int a = 0; a < d; ++a) z0[a] = 0.5 * (cfg.region.lo[a] + cfg.region.hi[a]);
  double f0 = cfg.density.pdf(z0);
  if (!(f0 > 0.0))
    throw ConfigInvalid("concentration: region center must have positive density");
  double tau_sq = 0.0;
  for (const Kernel* k : kernels) tau_sq = std::max(tau_sq, f0 * l2_norm_sq(*k));
  double tau = std::sqrt(tau_sq);

  BandwidthGrid bg =
      make_bandwidth_grid(cfg.bandwidth_floor(n), cfg.bandwidth_ceiling(n), cfg.rho);
  std::size_t levels = bg.levels.size();

  // Support sweep window and expectations per level.
  std::vector<double> e_all(levels * p);
  std::vector<double> win_lo(levels), win_hi(levels);
  std::vector<double> sides(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    double h = bg.levels[l];
    double side = std::pow(h, 1.0 / static_cast<double>(d));
    sides[l] = side;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < p; ++i) {
      e_all[l * p + i] = expected_window(cfg.density, *kernels[i], h, z0);
      Box s = kernels[i]->support();
      lo = std::min(lo, s.lo[0]);
      hi = std::max(hi, s.hi[0]);
    }
    win_lo[l] = z0[0] + side * lo;  // d = 1 sweep bound; higher d scans every point
    win_hi[l] = z0[0] + side * hi;
  }

  std::uint64_t study_seed = derive_seed(cfg.seed, detail::kTagConc);
  std::vector<std::vector<double>> stats(levels,
                                         std::vector<double>(cfg.replications, 0.0));
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    Rng rng(derive_seed(study_seed, 0, r));
    Sample sample = simulate(cfg.density, static_cast<int>(n), rng);
    std::vector<double> u(d), s_part(p);
    for (std::size_t l = 0; l < levels; ++l) {
      std::fill(s_part.begin(), s_part.end(), 0.0);
      double best = 0.0;
      const double* e = e_all.data() + l * p;
      // Between window hits the partial sums are flat, so the running sup of
      // |S_i - m e_i| over those m is attained at the segment ends; only the
      // hits need kernel evaluations.
      for (long long m = 1; m <= n; ++m) {
        auto row = sample.row(static_cast<int>(m - 1));
        if (d == 1 && (row[0] < win_lo[l] || row[0] > win_hi[l])) continue;
        for (int i = 0; i < p; ++i)
          best = std::max(best, std::abs(s_part[i] - static_cast<double>(m - 1) * e[i]));
        for (int a = 0; a < d; ++a) u[a] = (row[a] - z0[a]) / sides[l];
        for (int i = 0; i < p; ++i) s_part[i] += (*kernels[i])(u);
        for (int i = 0; i < p; ++i)
          best = std::max(best, std::abs(s_part[i] - static_cast<double>(m) * e[i]));
      }
      for (int i = 0; i < p; ++i)
        best = std::max(best, std::abs(s_part[i] - static_cast<double>(n) * e[i]));
      stats[l][r] = best;
    }
  });

  ConcentrationReport rep;
  rep.n = n;
  rep.replications = cfg.replications;
  rep.c = c;
  rep.tau = tau;
  rep.h_levels = bg.levels;
  rep.ratios = ratios;
  rep.seed = cfg.seed;
  rep.thresholds.assign(levels, std::vector<double>(ratios.size(), 0.0));
  rep.p_hat.assign(levels, std::vector<double>(ratios.size(), 0.0));
  rep.censored.assign(levels, std::vector<bool>(ratios.size(), false));
  for (std::size_t l = 0; l < levels; ++l) {
    double h = bg.levels[l];
    double scale = c * std::sqrt(static_cast<double>(n) * h * std::log(1.0 / h));
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
      double thr = tau * (1.0 + ratios[ri]) * scale;
      rep.thresholds[l][ri] = thr;
      int count = 0;
      for (double s : stats[l])
        if (s >= thr) ++count;
      if (count == 0) {
        rep.p_hat[l][ri] = 1.0 / (cfg.replications + 1.0);
        rep.censored[l][ri] = true;
      } else {
        rep.p_hat[l][ri] = static_cast<double>(count) / cfg.replications;
      }
    }
  }

  bool all_neg = true;
  std::vector<double> fitted_slopes, fitted_r_sq;
  for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
    std::vector<double> xs, ys;
    for (std::size_t l = 0; l < levels; ++l)
      if (!rep.censored[l][ri]) {
        xs.push_back(std::log(1.0 / bg.levels[l]));
        ys.push_back(std::log(rep.p_hat[l][ri]));
      }
    ConcentrationFit fit;
    fit.ratio = ratios[ri];
    fit.points_used = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
      LineFit lf = fit_line(xs, ys);
      fit.fitted = true;
      fit.slope = lf.slope;
      fit.intercept = lf.intercept;
      fit.r2 = lf.r2;
      all_neg = all_neg && lf.slope < 0.0;
      fitted_slopes.push_back(-lf.slope);
      fitted_r_sq.push_back(ratios[ri] * ratios[ri]);
    }
    rep.fits.push_back(fit);
  }
  rep.slopes_all_negative = !fitted_slopes.empty() && all_neg;
  if (fitted_slopes.size() >= 2) {
    rep.spearman_defined = true;
    rep.spearman_r2_vs_negslope = spearman_of(fitted_r_sq, fitted_slopes);
  }
  return rep;
}

namespace detail {

// Tail by explicit summation started in log space at k = 2n + 1.
inline double poisson_tail_sum(long long n) {
  long long m = 2 * n;
  double nd = static_cast<double>(n);
  double log_t0 = static_cast<double>(m + 1) * std::log(nd) - nd - std::lgamma(m + 2.0);
  double rel_sum = 1.0, rel_t = 1.0;
  for (long long k = m + 2;; ++k) {
    rel_t *= nd / static_cast<double>(k);
    rel_sum += rel_t;
    if (rel_t < rel_sum * 1e-18) break;
  }
  return std::exp(log_t0 + std::log(rel_sum));
}

// Same tail through the lower incomplete-gamma integral, by composite
// Gauss-Legendre on the log-scaled integrand.
inline double poisson_tail_gamma(long long n) {
  long long m = 2 * n;
  double nd = static_cast<double>(n);
  double lg = std::lgamma(m + 1.0);
  auto log_f = [&](double t) { return static_cast<double>(m) * std::log(t) - t - lg; };
  double peak = log_f(nd);  // integrand increases on (0, n] since m > n
  const GaussLegendre& gl = gauss_legendre(24);
  long long nseg = std::max<long long>(1, (n + 1) / 2);
  double w = nd / static_cast<double>(nseg);
  double acc = 0.0;
  for (long long s = 0; s < nseg; ++s) {
    double a = w * static_cast<double>(s);
    double b = a + w;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      double t = mid + half * gl.x[q];
      if (t <= 0.0) continue;
      acc += half * gl.w[q] * std::exp(log_f(t) - peak);
    }
  }
  return std::exp(peak + std::log(acc));
}

}  // namespace detail

struct ChernoffRow {
  long long n = 0;
  double exact = 0.0;
  double alt = 0.0;
  double bound = 0.0;
  double rel_gap = 0.0;
  bool holds = false;
};

struct ChernoffReport {
  std::vector<ChernoffRow> rows;
  bool all_hold = true;
  double max_rel_gap = 0.0;
};

/// Exact tail P(Poisson(n) > 2n) against the exponential bound
/// exp(-(2 ln 2 - 1) n), with two independent tail routes cross-checked.
inline ChernoffReport chernoff_check(const std::vector<long long>& n_list) {
  ChernoffReport rep;
  for (long long n : n_list) {
    if (n < 1) throw BadRange("chernoff: n must be >= 1");
    ChernoffRow row;
    row.n = n;
    row.exact = detail::poisson_tail_sum(n);
    row.alt = detail::poisson_tail_gamma(n);
    row.bound = std::exp(-(2.0 * std::log(2.0) - 1.0) * static_cast<double>(n));
    row.rel_gap = std::abs(row.exact - row.alt) / std::max({row.exact, row.alt, 1e-300});
    row.holds = row.exact <= row.bound;
    rep.all_hold = rep.all_hold && row.holds;
    rep.max_rel_gap = std::max(rep.max_rel_gap, row.rel_gap);
    rep.rows.push_back(row);
  }
  return rep;
}

struct CoveringReport {
  std::vector<double> eps;
  std::vector<long long> n_hat;
  std::vector<std::vector<int>> chosen;     // member indices kept per eps
  std::vector<std::vector<double>> dist;    // pairwise empirical-L2 distances
  bool fit_done = false;
  double v_hat = 0.0;
  LineFit fit;
  bool has_declared = false;
  double c0 = 0.0, v0 = 0.0;
  bool declared_consistent = true;
  int m_probe = 0;
  std::uint64_t seed = 0;
};

/// Greedy packing of the family under the empirical-L2 metric of a seeded
/// probe sample; packing sizes serve as covering-growth proxies, with a
/// log-log slope estimate of the growth exponent.
inline CoveringReport estimate_covering(const KernelFamily& family,
                                        const std::vector<double>& eps_list,
                                        const DensityModel& probe, int m_probe,
                                        std::uint64_t seed,
                                        std::optional<std::pair<double, double>> declared = {}) {
  if (m_probe < 1) throw ConfigInvalid("covering: need at least one probe point");
  for (double e : eps_list)
    if (!(e > 0.0 && e < 1.0)) throw ConfigInvalid("covering: eps values must lie in (0, 1)");
  if (probe.dim() != family.dim())
    throw DimensionUnsupported("covering: probe dimension must match the family");

  int p = family.size();
  int d = family.dim();
  Rng rng(derive_seed(seed, detail::kTagCovering));
  std::vector<double> x(d);
  std::vector<std::vector<double>> vals(p, std::vector<double>(m_probe, 0.0));
  for (int l = 0; l < m_probe; ++l) {
    probe.sample_point(rng, x);
    for (int i = 0; i < p; ++i) vals[i][l] = family.at(i)(x);
  }

  CoveringReport rep;
  rep.m_probe = m_probe;
  rep.seed = seed;
  rep.dist.assign(p, std::vector<double>(p, 0.0));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      double acc = 0.0;
      for (int l = 0; l < m_probe; ++l) {
        double dlt = vals[i][l] - vals[j][l];
        acc += dlt * dlt;
      }
      rep.dist[i][j] = rep.dist[j][i] = std::sqrt(acc / m_probe);
    }

  for (double eps : eps_list) {
    std::vector<int> kept;
    for (int i = 0; i < p; ++i) {
      bool far = true;
      for (int c : kept)
        if (rep.dist[i][c] < eps) {
          far = false;
          break;
        }
      if (far) kept.push_back(i);
    }
    rep.eps.push_back(eps);
    rep.n_hat.push_back(static_cast<long long>(kept.size()));
    rep.chosen.push_back(std::move(kept));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    xs.push_back(std::log(1.0 / rep.eps[i]));
    ys.push_back(std::log(static_cast<double>(rep.n_hat[i])));
  }
  if (xs.size() >= 2) {
    rep.fit = fit_line(xs, ys);
    rep.fit_done = true;
    rep.v_hat = rep.fit.slope;
  }
  if (declared) {
    rep.has_declared = true;
    rep.c0 = declared->first;
    rep.v0 = declared->second;
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
      if (static_cast<double>(rep.n_hat[i]) > rep.c0 * std::pow(rep.eps[i], -rep.v0) + 1e-9)
        rep.declared_consistent = false;
  }
  return rep;
}

struct PoissonizationRow {
  long long n = 0;
  double h = 0.0;
  double threshold = 0.0;
  double p_direct = 0.0;
  double p_poisson = 0.0;
  double ratio = 0.0;
  double se_ratio = 0.0;
  bool within = false;
};

struct PoissonizationReport {
  std::vector<PoissonizationRow> rows;
  int replications = 0;
  double quantile = 0.0;
  bool absolute_threshold = false;
  bool all_within = true;
  std::uint64_t seed = 0;
};

/// Empirical check of the tail-transfer heuristic between the fixed-n
/// process and its Poissonized companion: exceedance frequencies of the
/// sup over anchors at the per-n bandwidth floor, compared at a common
/// threshold (a quantile of the Poissonized sample, or an absolute value).
inline PoissonizationReport poissonization_gap(const ExperimentConfig& cfg, const Kernel& k,
                                               std::optional<double> abs_threshold = {},
                                               double quantile = 0.9) {
  cfg.validate();
  if (k.dim() != cfg.region.dim())
    throw DimensionUnsupported("poissonization: kernel dimension must match the region");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw ConfigInvalid("poissonization: quantile must lie in (0, 1)");
  std::vector<const Kernel*> kernels{&k};
  std::vector<detail::KernelMeta> meta = detail::make_kernel_meta(kernels);
  std::uint64_t study_seed = derive_seed(cfg.seed, detail::kTagPoisson);

  PoissonizationReport rep;
  rep.replications = cfg.replications;
  rep.quantile = quantile;
  rep.absolute_threshold = abs_threshold.has_value();
  rep.seed = cfg.seed;

  for (std::size_t li = 0; li < cfg.n_list.size(); ++li) {
    long long n = cfg.n_list[li];
    double h = cfg.bandwidth_floor(n);
    double side = std::pow(h, 1.0 / static_cast<double>(cfg.region.dim()));
    SpatialGrid sg = make_spatial_grid(cfg.region, cfg.delta, h);
    int d = cfg.region.dim();
    std::vector<double> anchors(static_cast<std::size_t>(sg.J) * d);
    std::vector<double> expect(sg.J);
    std::vector<double> z(d);
    for (long long j = 0; j < sg.J; ++j) {
      sg.anchor(j, z);
      std::copy(z.begin(), z.end(), anchors.begin() + static_cast<std::size_t>(j) * d);
      expect[j] = expected_window(cfg.density, k, h, z);
    }
    auto sup_norm = [&](const Sample& sample, long long centering_n) {
      detail::WindowSums sums(sample, meta);
      double best = 0.0;
      for (long long j = 0; j < sg.J; ++j) {
        const double* zz = anchors.data() + static_cast<std::size_t>(j) * d;
        double g = sums.sum(zz, side, 0) - static_cast<double>(centering_n) * expect[j];
        best = std::max(best, std::abs(g));
      }
      return best;
    };

    std::vector<double> norm_direct(cfg.replications), norm_poisson(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
      Rng rng_a(derive_seed(study_seed, li, 2 * r));
      Sample direct = simulate(cfg.density, static_cast<int>(n), rng_a);
      norm_direct[r] = sup_norm(direct, n);
      Rng rng_b(derive_seed(study_seed, li, 2 * r + 1));
      long long eta = rng_b.poisson(static_cast<double>(n));
      Sample poissonized = simulate(cfg.density, static_cast<int>(eta), rng_b);
      norm_poisson[r] = sup_norm(poissonized, n);
    });

    PoissonizationRow row;
    row.n = n;
    row.h = h;
    if (abs_threshold) {
      row.threshold = *abs_threshold;
    } else {
      std::vector<double> sorted = norm_poisson;
      std::sort(sorted.begin(), sorted.end());
      row.threshold = quantile_of(sorted, quantile);
    }
    auto frac_at_least = [&](const std::vector<double>& v) {
      int c = 0;
      for (double s : v)
        if (s >= row.threshold) ++c;
      return static_cast<double>(c) / static_cast<double>(v.size());
    };
    row.p_direct = frac_at_least(norm_direct);
    row.p_poisson = frac_at_least(norm_poisson);
    double R = static_cast<double>(cfg.replications);
    if (row.p_poisson > 0.0) {
      row.ratio = row.p_direct / row.p_poisson;
      if (row.p_direct > 0.0)
        row.se_ratio = row.ratio * std::sqrt((1.0 - row.p_direct) / (R * row.p_direct) +
                                             (1.0 - row.p_poisson) / (R * row.p_poisson));
    } else {
      row.ratio = row.p_direct > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    row.within = row.ratio <= 2.0 + 3.0 * row.se_ratio;
    rep.all_within = rep.all_within && row.within;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace ulep
