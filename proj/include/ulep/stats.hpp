#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ulep/common.hpp"

namespace ulep {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw EmptySample("mean of empty vector");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased (n-1) standard deviation; 0 for a single observation.
inline double sd_of(const std::vector<double>& v) {
  if (v.empty()) throw EmptySample("sd of empty vector");
  if (v.size() == 1) return 0.0;
  double m = mean_of(v), acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Linear-interpolation quantile on sorted order statistics (the common
// "type 7" rule): q_p sits at index (n-1)p.
inline double quantile_of(std::vector<double> v, double p) {
  if (v.empty()) throw EmptySample("quantile of empty vector");
  std::sort(v.begin(), v.end());
  double idx = p * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median_of(const std::vector<double>& v) { return quantile_of(v, 0.5); }

// Large-sample standard error of the median under the normal approximation:
// sqrt(pi/2) * sd / sqrt(n).
inline double se_median_of(const std::vector<double>& v) {
  if (v.empty()) throw EmptySample("se of empty vector");
  return 1.2533141373155003 * sd_of(v) / std::sqrt(static_cast<double>(v.size()));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need >= 2 paired points");
  int n = static_cast<int>(x.size());
  double mx = mean_of(x), my = mean_of(y), sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error("fit_line: degenerate abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

inline std::vector<double> ranks_of(const std::vector<double>& v) {
  std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // ties share the mean rank
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman_of(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("spearman: need >= 2 paired points");
  std::vector<double> rx = ranks_of(x), ry = ranks_of(y);
  double mx = mean_of(rx), my = mean_of(ry), sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ulep
