#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ulep {

inline constexpr const char* kVersion = "0.1.0";

// Base error; every failure mode below is a named subtype so callers can
// catch precisely what the contract names.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveRatio : Error { using Error::Error; };
struct BadRange : Error { using Error::Error; };
struct DegenerateRegion : Error { using Error::Error; };
struct NonPositiveAlpha : Error { using Error::Error; };
struct BadBandwidth : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct DimensionUnsupported : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };
struct NonPositiveDensity : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct DegenerateSample : Error { using Error::Error; };
struct NoRoot : Error { using Error::Error; };
struct NullDirection : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct TargetOutsideBall : Error { using Error::Error; };
struct FileMissing : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

using Point = std::vector<double>;

// Axis-aligned box lo <= hi in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size() || lo.empty())
      throw DegenerateRegion("box bounds must be nonempty and of equal dimension");
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (!(lo[k] <= hi[k])) throw DegenerateRegion("box has lo > hi on axis " + std::to_string(k));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  double side(int k) const { return hi[k] - lo[k]; }

  double volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
    return v;
  }

  bool contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
  }

  // True when `inner` sits inside this box.
  bool contains_box(const Box& inner) const {
    if (inner.dim() != dim()) return false;
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (inner.lo[k] < lo[k] || inner.hi[k] > hi[k]) return false;
    return true;
  }
};

inline Box make_box1(double lo, double hi) { return Box({lo}, {hi}); }

// Intersection clipped to a valid (possibly flat) box; empty intersections
// collapse to a zero-volume box at the closest faces.
inline Box intersect(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) throw DegenerateRegion("intersect: dimension mismatch");
  std::vector<double> lo(a.lo.size()), hi(a.lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] = std::max(a.lo[k], b.lo[k]);
    hi[k] = std::min(a.hi[k], b.hi[k]);
    if (hi[k] < lo[k]) hi[k] = lo[k];
  }
  return Box(std::move(lo), std::move(hi));
}

// Sup norm used for all statement-level distances.
inline double max_norm(std::span<const double> z) {
  double m = 0.0;
  for (double v : z) m = std::max(m, std::abs(v));
  return m;
}

// Enlarged neighborhood of a region: bounds pushed out by alpha on every
// axis. The result is meant to be read as the open neighborhood.
inline Box enlarge(const Box& region, double alpha) {
  if (!(alpha > 0.0)) throw NonPositiveAlpha("enlarge: alpha must be > 0");
  std::vector<double> lo(region.lo), hi(region.hi);
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= alpha;
    hi[k] += alpha;
  }
  return Box(std::move(lo), std::move(hi));
}

inline bool almost_equal_rel(double a, double b, double rel) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace ulep
