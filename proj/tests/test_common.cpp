#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "ulep/common.hpp"
#include "ulep/rng.hpp"
#include "ulep/stats.hpp"

namespace {

using namespace ulep;

TEST(Box, ValidatesBounds) {
  EXPECT_THROW(Box({0.0, 0.0}, {1.0}), DegenerateRegion);
  EXPECT_THROW(Box({1.0}, {0.5}), DegenerateRegion);
  EXPECT_THROW(Box({}, {}), DegenerateRegion);
  EXPECT_NO_THROW(Box({0.0}, {0.0}));  // degenerate but ordered is allowed
}

TEST(Box, Geometry) {
  Box b({0.0, 1.0}, {2.0, 4.0});
  EXPECT_EQ(b.dim(), 2);
  EXPECT_DOUBLE_EQ(b.side(0), 2.0);
  EXPECT_DOUBLE_EQ(b.side(1), 3.0);
  EXPECT_DOUBLE_EQ(b.volume(), 6.0);
  std::vector<double> in{1.0, 2.0}, edge{2.0, 4.0}, out{2.1, 2.0};
  EXPECT_TRUE(b.contains(in));
  EXPECT_TRUE(b.contains(edge));
  EXPECT_FALSE(b.contains(out));
}

TEST(Box, IntersectAndEnlarge) {
  Box a({0.0}, {1.0}), b({0.5}, {2.0});
  Box c = intersect(a, b);
  EXPECT_DOUBLE_EQ(c.lo[0], 0.5);
  EXPECT_DOUBLE_EQ(c.hi[0], 1.0);
  Box big = enlarge(make_box1(0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(big.lo[0], -0.5);
  EXPECT_DOUBLE_EQ(big.hi[0], 1.5);
}

TEST(Common, MaxNorm) {
  std::vector<double> v{-3.0, 2.0, 0.5};
  EXPECT_DOUBLE_EQ(max_norm(v), 3.0);
}

TEST(Common, AlmostEqualRel) {
  EXPECT_TRUE(almost_equal_rel(1.0, 1.0 + 1e-13, 1e-12));
  EXPECT_FALSE(almost_equal_rel(1.0, 1.001, 1e-6));
  EXPECT_TRUE(almost_equal_rel(0.0, 0.0, 1e-12));
}

TEST(Common, ErrorsShareBase) {
  try {
    throw BadBandwidth("h");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("h"), std::string::npos);
  }
  EXPECT_THROW(throw NoRoot("x"), Error);
  EXPECT_THROW(throw ConfigInvalid("x"), std::runtime_error);
}

TEST(Rng, SeedSeparation) {
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_NE(derive_seed(1, 2, 0), derive_seed(1, 2, 1));
  EXPECT_EQ(derive_seed(9, 4, 7), derive_seed(9, 4, 7));
}

TEST(Rng, Reproducible) {
  Rng a(42), b(42), c(43);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    if (x != c.uniform()) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Rng, UniformRangeAndMoments) {
  Rng r(7);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.uniform(2.0, 5.0);
    ASSERT_GE(x, 2.0);
    ASSERT_LT(x, 5.0);
    s += x;
    s2 += x * x;
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  // mean 3.5, var 0.75; tolerances are ~5 sigma of the MC error
  EXPECT_NEAR(mean, 3.5, 0.01);
  EXPECT_NEAR(var, 0.75, 0.02);
}

TEST(Rng, NormalMoments) {
  Rng r(11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.012);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, PoissonMoments) {
  Rng r(13);
  const int n = 100000;
  const double lambda = 37.5;
  double s = 0.0, s2 = 0.0;
  long long mn = 1 << 30, mx = -1;
  for (int i = 0; i < n; ++i) {
    long long k = r.poisson(lambda);
    ASSERT_GE(k, 0);
    mn = std::min(mn, k);
    mx = std::max(mx, k);
    s += static_cast<double>(k);
    s2 += static_cast<double>(k) * static_cast<double>(k);
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, lambda, 0.12);
  EXPECT_NEAR(var, lambda, 1.2);
  EXPECT_GT(mx, mn);  // not degenerate
}

TEST(Rng, PoissonSmallMean) {
  Rng r(17);
  const int n = 200000;
  long long zeros = 0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    long long k = r.poisson(0.25);
    if (k == 0) ++zeros;
    s += static_cast<double>(k);
  }
  EXPECT_NEAR(s / n, 0.25, 0.01);
  // P(0) = exp(-0.25) = 0.7788
  EXPECT_NEAR(static_cast<double>(zeros) / n, std::exp(-0.25), 0.01);
}

// Type-7 quantiles: q(p) = x[(n-1)p] interpolated. For {1,2,3,4}:
// q(0.3) = 1 + 0.9*(2-1) = 1.9, q(0.5) = 2.5, q(1) = 4.
TEST(Stats, QuantileType7) {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_NEAR(quantile_of(v, 0.3), 1.9, 1e-12);
  EXPECT_NEAR(quantile_of(v, 0.5), 2.5, 1e-12);
  EXPECT_DOUBLE_EQ(quantile_of(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_of(v, 1.0), 4.0);
  std::vector<double> odd{5.0, 1.0, 3.0};
  EXPECT_DOUBLE_EQ(median_of(odd), 3.0);
}

TEST(Stats, SeMedianConstant) {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  double sd = sd_of(v);
  EXPECT_NEAR(se_median_of(v), 1.2533141373155003 * sd / std::sqrt(5.0), 1e-12);
}

TEST(Stats, FitLineExact) {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.n, 4);
}

TEST(Stats, RanksWithTies) {
  std::vector<double> v{1.0, 1.0, 2.0};
  std::vector<double> r = ranks_of(v);
  EXPECT_DOUBLE_EQ(r[0], 1.5);
  EXPECT_DOUBLE_EQ(r[1], 1.5);
  EXPECT_DOUBLE_EQ(r[2], 3.0);
}

TEST(Stats, Spearman) {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<double> up{10.0, 20.0, 25.0, 40.0};
  std::vector<double> down{4.0, 3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(spearman_of(x, up), 1.0);
  EXPECT_DOUBLE_EQ(spearman_of(x, down), -1.0);
}

TEST(Stats, MeanSd) {
  std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  EXPECT_DOUBLE_EQ(mean_of(v), 5.0);
  // sample sd with the n-1 divisor: variance 32/7
  EXPECT_NEAR(sd_of(v), std::sqrt(32.0 / 7.0), 1e-12);
}

}  // namespace
