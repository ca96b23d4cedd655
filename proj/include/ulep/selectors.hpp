#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/sample.hpp"
#include "ulep/stats.hpp"

namespace ulep {

struct SelectorResult {
  double h_star = 0.0;
  std::string method;
  std::map<std::string, double> diagnostics;
};

namespace detail {

inline std::vector<double> column0(const Sample& sample) {
  if (sample.dim() != 1) throw DimensionUnsupported("selector: univariate data required");
  std::vector<double> x(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i) x[i] = sample.row(i)[0];
  return x;
}

inline double robust_spread(const std::vector<double>& x, double iqr_scale) {
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double sd = sd_of(x);
  double iqr = quantile_of(sorted, 0.75) - quantile_of(sorted, 0.25);
  return std::min(sd, iqr / iqr_scale);
}

/// Unordered pair counts by bin distance: cnt[k] = #{i<j : |bin_i - bin_j| = k}.
/// Lets the pilot functionals run in O(bins) per evaluation instead of O(n^2).
struct BinnedPairs {
  std::vector<double> cnt;
  double bin_width = 0.0;
  std::size_t n = 0;
};

inline BinnedPairs bin_pairs(const std::vector<double>& x, int nbins) {
  BinnedPairs bp;
  bp.n = x.size();
  auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  double range = (*mx_it - *mn_it) * 1.01;
  if (!(range > 0.0)) throw DegenerateSample("selector: sample has zero spread");
  bp.bin_width = range / nbins;
  std::vector<double> counts(nbins, 0.0);
  for (double v : x) {
    int b = static_cast<int>((v - *mn_it) / bp.bin_width);
    counts[std::clamp(b, 0, nbins - 1)] += 1.0;
  }
  bp.cnt.assign(nbins, 0.0);
  for (int k = 0; k < nbins; ++k) {
    if (counts[k] == 0.0) continue;
    bp.cnt[0] += counts[k] * (counts[k] - 1.0) / 2.0;
    for (int j = k + 1; j < nbins; ++j)
      if (counts[j] != 0.0) bp.cnt[j - k] += counts[k] * counts[j];
  }
  return bp;
}

inline double phi4(double x) {
  double x2 = x * x;
  return (x2 * x2 - 6.0 * x2 + 3.0) * std::exp(-0.5 * x2) * 0.3989422804014327;
}

inline double phi6(double x) {
  double x2 = x * x;
  return (x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0) * std::exp(-0.5 * x2) *
         0.3989422804014327;
}

// sum over all ordered pairs (diagonal included) of phi4((Xi-Xj)/a),
// divided by n(n-1)a^5; the fourth-derivative functional estimate.
inline double pair_functional_s(const BinnedPairs& bp, double a) {
  double n = static_cast<double>(bp.n);
  double sum = 0.0;
  for (std::size_t k = 0; k < bp.cnt.size(); ++k)
    if (bp.cnt[k] != 0.0) sum += bp.cnt[k] * phi4(static_cast<double>(k) * bp.bin_width / a);
  return (2.0 * sum + n * phi4(0.0)) / (n * (n - 1.0) * std::pow(a, 5.0));
}

inline double pair_functional_t(const BinnedPairs& bp, double b) {
  double n = static_cast<double>(bp.n);
  double sum = 0.0;
  for (std::size_t k = 0; k < bp.cnt.size(); ++k)
    if (bp.cnt[k] != 0.0) sum += bp.cnt[k] * phi6(static_cast<double>(k) * bp.bin_width / b);
  return -(2.0 * sum + n * phi6(0.0)) / (n * (n - 1.0) * std::pow(b, 7.0));
}

}  // namespace detail

/// Rule-of-thumb pilot bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}, a window
/// width (equal to the volume bandwidth in one dimension).
inline SelectorResult silverman(const Sample& sample) {
  std::vector<double> x = detail::column0(sample);
  if (x.size() < 2) throw DegenerateSample("silverman: need at least two observations");
  double spread = detail::robust_spread(x, 1.34);
  if (!(spread > 0.0)) throw DegenerateSample("silverman: sample has zero spread");
  SelectorResult r;
  r.method = "silverman";
  r.h_star = 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
  r.diagnostics["spread"] = spread;
  r.diagnostics["n"] = static_cast<double>(x.size());
  return r;
}

/// Solve-the-equation plug-in bandwidth: two-stage normal-reference pilots
/// feed pairwise curvature functionals, and the fixed-point equation
/// (1 / (2 sqrt(pi) n S(gamma(h))))^{1/5} = h is solved by bisection on
/// [1e-6, 1] to absolute tolerance 1e-8.
inline SelectorResult sheather_jones(const Sample& sample, int nbins = 1000) {
  std::vector<double> x = detail::column0(sample);
  if (x.size() < 10) throw DegenerateSample("sheather_jones: need at least ten observations");
  double n = static_cast<double>(x.size());
  double lambda = detail::robust_spread(x, 1.349);
  if (!(lambda > 0.0)) throw DegenerateSample("sheather_jones: sample has zero spread");

  detail::BinnedPairs bp = detail::bin_pairs(x, nbins);
  double a = 0.920 * lambda * std::pow(n, -1.0 / 7.0);
  double b = 0.912 * lambda * std::pow(n, -1.0 / 9.0);
  double s_a = detail::pair_functional_s(bp, a);
  double t_b = detail::pair_functional_t(bp, b);
  if (!(s_a > 0.0) || !(t_b > 0.0))
    throw NoRoot("sheather_jones: pilot curvature functionals are not positive");

  double const alpha2 = 1.357 * std::pow(s_a / t_b, 1.0 / 7.0);
  auto gap = [&](double h) {
    double gamma = alpha2 * std::pow(h, 5.0 / 7.0);
    double s = detail::pair_functional_s(bp, gamma);
    if (!(s > 0.0)) return -h;  // push the root search left of this point
    return std::pow(1.0 / (2.0 * std::sqrt(M_PI) * n * s), 0.2) - h;
  };

  double lo = 1e-6, hi = 1.0;
  double g_lo = gap(lo), g_hi = gap(hi);
  if (!(g_lo > 0.0) || !(g_hi < 0.0))
    throw NoRoot("sheather_jones: no sign change on [1e-06, 1]; gap(lo)=" + std::to_string(g_lo) +
                 " gap(hi)=" + std::to_string(g_hi));
  while (hi - lo > 1e-8) {
    double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? lo : hi) = mid;
  }

  SelectorResult r;
  r.method = "sheather-jones";
  r.h_star = 0.5 * (lo + hi);
  r.diagnostics["lambda"] = lambda;
  r.diagnostics["pilot_a"] = a;
  r.diagnostics["pilot_b"] = b;
  r.diagnostics["s_a"] = s_a;
  r.diagnostics["t_b"] = t_b;
  r.diagnostics["n"] = n;
  return r;
}

struct BandwidthRatioEntry {
  std::size_t n = 0;
  double h = 0.0;
  double ratio = 0.0;
  bool valid = false;
};

struct BandwidthRatioReport {
  std::vector<BandwidthRatioEntry> entries;
  double c_lo = 0.0;
  double c_hi = 0.0;
  bool pass = false;
  std::string witness;
};

/// Finite-n surrogate for the admissible-random-bandwidth condition: each
/// realized h*_n should look like n^{-c} with c in a user band inside (0,1).
/// Reports the per-n exponent log(1/h*_n)/log n and a corridor verdict.
/// Total by design: malformed entries fail the verdict instead of throwing.
inline BandwidthRatioReport random_bandwidth_check(
    const std::vector<std::pair<std::size_t, double>>& h_values, double c_lo, double c_hi) {
  BandwidthRatioReport rep;
  rep.c_lo = c_lo;
  rep.c_hi = c_hi;
  rep.pass = c_lo > 0.0 && c_hi < 1.0 && c_lo < c_hi;
  if (!rep.pass) rep.witness = "corridor must satisfy 0 < c_lo < c_hi < 1";
  std::size_t prev_n = 0;
  for (const auto& [n, h] : h_values) {
    BandwidthRatioEntry e;
    e.n = n;
    e.h = h;
    if (n >= 2 && h > 0.0 && n > prev_n) {
      e.valid = true;
      e.ratio = std::log(1.0 / h) / std::log(static_cast<double>(n));
      if (rep.pass && (e.ratio < c_lo || e.ratio > c_hi)) {
        rep.pass = false;
        rep.witness = "exponent " + std::to_string(e.ratio) + " at n=" + std::to_string(n) +
                      " falls outside the corridor";
      }
    } else if (rep.pass) {
      rep.pass = false;
      rep.witness = "entry (n=" + std::to_string(n) + ", h=" + std::to_string(h) +
                    ") violates increasing n >= 2 with positive h";
    }
    prev_n = n;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace ulep
