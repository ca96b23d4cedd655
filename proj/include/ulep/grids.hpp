#pragma once

#include <cmath>
#include <vector>

#include "ulep/common.hpp"

namespace ulep {

/// Geometric bandwidth net {h_lo * rho^l} capped by h_hi.
///
/// R = floor(log(h_hi/h_lo) / log(rho)) + 1, with values within 1e-12 of an
/// integer rounded first. Levels 0..R-1 follow the geometric ladder; h_hi is
/// appended unless the ladder already lands on it (1e-12 relative), in which
/// case the top level is snapped to h_hi exactly.
struct BandwidthGrid {
  double h_lo = 0.0;
  double h_hi = 0.0;
  double rho = 0.0;
  int R = 0;
  bool merged_endpoint = false;
  std::vector<double> levels;
};

inline BandwidthGrid make_bandwidth_grid(double h_lo, double h_hi, double rho) {
  if (!(rho > 1.0)) throw NonPositiveRatio("bandwidth grid: rho must be > 1");
  if (!(h_lo > 0.0 && h_lo < 1.0 && h_hi > 0.0 && h_hi < 1.0))
    throw BadRange("bandwidth grid: endpoints must lie in (0, 1)");
  if (!(h_lo < h_hi)) throw BadRange("bandwidth grid: need h_lo < h_hi");

  BandwidthGrid g;
  g.h_lo = h_lo;
  g.h_hi = h_hi;
  g.rho = rho;

  double u = std::log(h_hi / h_lo) / std::log(rho);
  double snapped = std::round(u);
  if (std::abs(u - snapped) <= 1e-12) u = snapped;
  g.R = static_cast<int>(std::floor(u)) + 1;

  g.levels.reserve(g.R + 1);
  double level = h_lo;
  for (int l = 0; l < g.R; ++l) {
    g.levels.push_back(level);
    level *= rho;
  }
  if (almost_equal_rel(g.levels.back(), h_hi, 1e-12)) {
    g.levels.back() = h_hi;
    g.merged_endpoint = true;
  } else {
    g.levels.push_back(h_hi);
  }
  return g;
}

/// Hypercube cover of a region: per-axis anchors spaced by (delta*h)^{1/d},
/// starting at the lower face. All anchors lie inside the region; the last
/// cube per axis may overhang the upper face. C reports the realized
/// constant in the cube-count bound J <= C / h.
struct SpatialGrid {
  Box region;
  double cube_side = 0.0;
  std::vector<std::vector<double>> axis_anchors;
  long long J = 0;
  double C = 0.0;

  int dim() const { return region.dim(); }

  // Anchor j in row-major order over the per-axis lists.
  void anchor(long long j, std::span<double> out) const {
    for (int k = dim() - 1; k >= 0; --k) {
      long long m = static_cast<long long>(axis_anchors[k].size());
      out[k] = axis_anchors[k][j % m];
      j /= m;
    }
  }
};

inline SpatialGrid make_spatial_grid(const Box& region, double delta, double h) {
  if (!(delta > 0.0)) throw NonPositiveRatio("spatial grid: delta must be > 0");
  if (!(h > 0.0 && h < 1.0)) throw BadBandwidth("spatial grid: h must lie in (0, 1)");
  for (int k = 0; k < region.dim(); ++k)
    if (!(region.side(k) > 0.0)) throw DegenerateRegion("spatial grid: flat region axis");

  SpatialGrid g;
  g.region = region;
  int d = region.dim();
  g.cube_side = std::pow(delta * h, 1.0 / d);
  g.axis_anchors.resize(d);
  g.J = 1;
  for (int k = 0; k < d; ++k) {
    double len = region.side(k);
    double m_real = len / g.cube_side;
    double snapped = std::round(m_real);
    if (std::abs(m_real - snapped) <= 1e-12 * std::max(1.0, std::abs(m_real))) m_real = snapped;
    long long m = static_cast<long long>(std::ceil(m_real));
    if (m < 1) m = 1;
    g.axis_anchors[k].resize(m);
    for (long long j = 0; j < m; ++j) g.axis_anchors[k][j] = region.lo[k] + g.cube_side * j;
    g.J *= m;
  }
  g.C = static_cast<double>(g.J) * h;
  return g;
}

}  // namespace ulep
