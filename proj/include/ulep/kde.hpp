#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/density.hpp"
#include "ulep/kernels.hpp"
#include "ulep/process.hpp"
#include "ulep/sample.hpp"

namespace ulep {

struct KdeEstimate {
  double value = 0.0;
  std::size_t n = 0;
  double h = 0.0;
  Point z;
  std::string kernel_label;
};

/// Parzen-Rosenblatt estimate at z under the volume-bandwidth convention:
/// value = (n h)^{-1} sum_i K((Z_i - z) / h^{1/d}).
inline KdeEstimate kde(const Sample& sample, const Kernel& k, double h, const Point& z) {
  if (sample.n() == 0) throw EmptySample("kde: empty sample");
  if (!(h > 0.0) || !(h < 1.0)) throw BadBandwidth("kde: bandwidth must lie in (0, 1)");
  if (sample.dim() != k.dim() || z.size() != k.dim())
    throw DimensionUnsupported("kde: dimension mismatch");
  std::size_t d = k.dim();
  double c = std::pow(h, 1.0 / static_cast<double>(d));
  std::vector<double> u(d);
  double acc = 0.0;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    auto zi = sample.row(i);
    for (std::size_t a = 0; a < d; ++a) u[a] = (zi[a] - z[a]) / c;
    acc += k(u);
  }
  KdeEstimate est;
  est.value = acc / (static_cast<double>(sample.n()) * h);
  est.n = sample.n();
  est.h = h;
  est.z = z;
  est.kernel_label = k.label();
  return est;
}

/// Smoothed density h^{-1} E K((Z - z)/h^{1/d}): the estimator's centering
/// term, also usable at a realized data-driven bandwidth.
inline double expected_kde(const DensityModel& density, const Kernel& k, double h, const Point& z,
                           int nodes = 0) {
  if (!(h > 0.0) || !(h < 1.0)) throw BadBandwidth("expected_kde: bandwidth must lie in (0, 1)");
  return expected_window(density, k, h, z, nodes) / h;
}

struct ConfidenceBand {
  KdeEstimate center;
  double f_z = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// The width constant is the almost-sure limit of the normalized
  /// estimation error, uniform over compliant bandwidth ranges, so the band
  /// is asymptotically exact rather than conservative.
  std::string level = "asymptotic-exact (a.s. limit)";
};

/// Exact-constant band around a fixed-bandwidth estimate:
/// half_width = sqrt(2 log(1/h) f(z) |K|_2^2 / (n h)).
inline ConfidenceBand confidence_band(const KdeEstimate& estimate, double f_z, const Kernel& k) {
  if (!(f_z > 0.0)) throw NonPositiveDensity("confidence_band: density value must be positive");
  if (!(estimate.h > 0.0) || !(estimate.h < 1.0))
    throw BadBandwidth("confidence_band: bandwidth must lie in (0, 1)");
  if (estimate.n == 0) throw EmptySample("confidence_band: estimate carries no sample size");
  ConfidenceBand band;
  band.center = estimate;
  band.f_z = f_z;
  band.half_width = std::sqrt(2.0 * std::log(1.0 / estimate.h) * f_z * l2_norm_sq(k) /
                              (static_cast<double>(estimate.n) * estimate.h));
  band.lower = estimate.value - band.half_width;
  band.upper = estimate.value + band.half_width;
  return band;
}

}  // namespace ulep
