#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ulep/density.hpp"
#include "ulep/kde.hpp"
#include "ulep/sample.hpp"

namespace {

using namespace ulep;

Sample rows1(std::vector<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return Sample::from_rows(rows, 1);
}

// f_n(z) = (1/(nh)) sum K((Z_i - z)/h): one point at 0.5, window [0.25, 0.75]
// of the uniform kernel at h = 0.5 -> 1 / (1 * 0.5) = 2.
TEST(Kde, OnePointHandValue) {
  Sample s = rows1({0.5});
  KdeEstimate e = kde(s, uniform_kernel(1), 0.5, {0.25});
  EXPECT_DOUBLE_EQ(e.value, 2.0);
  EXPECT_EQ(e.n, 1);
  EXPECT_DOUBLE_EQ(e.h, 0.5);
  EXPECT_EQ(e.kernel_label, "uniform");
}

TEST(Kde, CountsWindowMembers) {
  Sample s = rows1({0.1, 0.2, 0.3, 0.9});
  // window [0.15, 0.4]: members 0.2, 0.3 -> 2 / (4 * 0.25) = 2
  KdeEstimate e = kde(s, uniform_kernel(1), 0.25, {0.15});
  EXPECT_DOUBLE_EQ(e.value, 2.0);
}

TEST(Kde, TriangularWeights) {
  Sample s = rows1({0.5});
  // u = (0.5 - 0.4)/0.2 = 0.5: tent value 1 -> 1/(1*0.2) * 1 = 5
  KdeEstimate e = kde(s, triangular_kernel(1), 0.2, {0.4});
  EXPECT_NEAR(e.value, 5.0, 1e-12);
  // u = 0.25: tent value 0.5 -> 2.5
  KdeEstimate e2 = kde(s, triangular_kernel(1), 0.2, {0.45});
  EXPECT_NEAR(e2.value, 2.5, 1e-12);
}

TEST(Kde, TwoDimensional) {
  Sample s = Sample::from_rows({{0.5, 0.5}, {0.9, 0.9}}, 2);
  // h = 0.25, side 0.5: window [0.3, 0.8]^2 holds only (0.5, 0.5)
  KdeEstimate e = kde(s, uniform_kernel(2), 0.25, {0.3, 0.3});
  EXPECT_DOUBLE_EQ(e.value, 1.0 / (2.0 * 0.25));
}

TEST(Kde, ExpectedKdeIsSmoothedDensity) {
  DensityModel u = uniform_density(Box({0.0}, {2.0}));
  // interior point: E f_n = f = 0.5 for any window inside the support
  EXPECT_NEAR(expected_kde(u, uniform_kernel(1), 0.1, {0.7}), 0.5, 1e-12);
  // straddling the left edge at z = -0.05: only half the window has mass
  EXPECT_NEAR(expected_kde(u, uniform_kernel(1), 0.1, {-0.05}), 0.25, 1e-12);
}

TEST(Kde, Validation) {
  Sample empty(0, 1);
  EXPECT_THROW(kde(empty, uniform_kernel(1), 0.1, {0.5}), EmptySample);
  Sample s = rows1({0.5});
  EXPECT_THROW(kde(s, uniform_kernel(1), 0.0, {0.5}), BadBandwidth);
  EXPECT_THROW(kde(s, uniform_kernel(1), 1.5, {0.5}), BadBandwidth);
  EXPECT_THROW(kde(s, uniform_kernel(2), 0.1, {0.5, 0.5}), DimensionUnsupported);
  EXPECT_THROW(kde(s, uniform_kernel(1), 0.1, {0.5, 0.5}), DimensionUnsupported);
}

TEST(Band, HalfWidthFormula) {
  Sample s = rows1({0.45, 0.55, 0.65});
  Kernel k = uniform_kernel(1);
  KdeEstimate e = kde(s, k, 0.2, {0.4});
  ConfidenceBand b = confidence_band(e, 0.5, k);
  double expect = std::sqrt(2.0 * std::log(1.0 / 0.2) * 0.5 * 1.0 / (3.0 * 0.2));
  EXPECT_NEAR(b.half_width, expect, 1e-12);
  EXPECT_DOUBLE_EQ(b.lower, e.value - expect);
  EXPECT_DOUBLE_EQ(b.upper, e.value + expect);
  EXPECT_DOUBLE_EQ(b.f_z, 0.5);
  EXPECT_DOUBLE_EQ(b.center.value, e.value);
}

TEST(Band, KernelL2EntersTheWidth) {
  Sample s = rows1({0.45, 0.55, 0.65});
  KdeEstimate e = kde(s, triangular_kernel(1), 0.2, {0.4});
  ConfidenceBand b = confidence_band(e, 0.5, triangular_kernel(1));
  // ||K||_2^2 = 1/3 for the tent profile
  double expect = std::sqrt(2.0 * std::log(5.0) * 0.5 * (1.0 / 3.0) / (3.0 * 0.2));
  EXPECT_NEAR(b.half_width, expect, 1e-12);
}

TEST(Band, WidthShrinksWithN) {
  Kernel k = uniform_kernel(1);
  double prev = 1e300;
  for (int n : {10, 100, 1000, 10000}) {
    std::vector<double> xs(n, 0.5);
    KdeEstimate e = kde(rows1(xs), k, 0.1, {0.45});
    ConfidenceBand b = confidence_band(e, 1.0, k);
    EXPECT_LT(b.half_width, prev);
    prev = b.half_width;
  }
}

TEST(Band, WidthGrowsAsBandwidthShrinks) {
  Kernel k = uniform_kernel(1);
  std::vector<double> xs(1000, 0.5);
  Sample s = rows1(xs);
  double prev = 0.0;
  for (double h : {0.5, 0.2, 0.05, 0.01}) {
    ConfidenceBand b = confidence_band(kde(s, k, h, {0.45}), 1.0, k);
    EXPECT_GT(b.half_width, prev);
    prev = b.half_width;
  }
}

TEST(Band, RequiresPositiveDensity) {
  Sample s = rows1({0.5});
  KdeEstimate e = kde(s, uniform_kernel(1), 0.1, {0.45});
  EXPECT_THROW(confidence_band(e, 0.0, uniform_kernel(1)), NonPositiveDensity);
  EXPECT_THROW(confidence_band(e, -1.0, uniform_kernel(1)), NonPositiveDensity);
}

// The band is an almost-sure asymptotic statement; on simulated data the
// empirical estimate should sit inside the band at reasonable sizes.
TEST(Band, CoversOnSimulatedData) {
  DensityModel u = uniform_density(Box({0.0}, {2.0}));
  Rng rng(71);
  int hits = 0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) {
    Sample s = simulate(u, 5000, rng);
    double h = 0.05;
    KdeEstimate e = kde(s, uniform_kernel(1), h, {0.9});
    ConfidenceBand b = confidence_band(e, 0.5, uniform_kernel(1));
    if (b.lower <= 0.5 && 0.5 <= b.upper) ++hits;
  }
  // the band is conservative by construction at this n
  EXPECT_GE(hits, reps - 2);
}

}  // namespace
