#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ulep/kernels.hpp"

namespace {

using namespace ulep;

TEST(Kernels, UniformShape) {
  Kernel k = uniform_kernel(2);
  std::vector<double> in{0.3, 0.9}, out{0.3, 1.2};
  EXPECT_DOUBLE_EQ(k(in), 1.0);
  EXPECT_DOUBLE_EQ(k(out), 0.0);
  EXPECT_DOUBLE_EQ(kernel_integral(k), 1.0);
  EXPECT_NEAR(l2_norm_sq(k), 1.0, 1e-14);
  Box sup = k.support();
  EXPECT_DOUBLE_EQ(sup.lo[0], 0.0);
  EXPECT_DOUBLE_EQ(sup.hi[1], 1.0);
  EXPECT_TRUE(k.is_indicator());
  EXPECT_DOUBLE_EQ(k.declared_abs_max(), 1.0);
}

// Tent profile 1-|2x-1|: peak 1 at x=1/2, integral 1/2 per axis, squared
// integral 1/3 per axis.
TEST(Kernels, TriangularShape) {
  Kernel k1 = triangular_kernel(1);
  std::vector<double> mid{0.5}, quarter{0.25}, edge{1.0};
  EXPECT_DOUBLE_EQ(k1(mid), 1.0);
  EXPECT_DOUBLE_EQ(k1(quarter), 0.5);
  EXPECT_DOUBLE_EQ(k1(edge), 0.0);
  EXPECT_NEAR(kernel_integral(k1), 0.5, 1e-14);
  EXPECT_NEAR(l2_norm_sq(k1), 1.0 / 3.0, 1e-13);
  EXPECT_FALSE(k1.is_indicator());

  Kernel k2 = triangular_kernel(2);
  EXPECT_NEAR(kernel_integral(k2), 0.25, 1e-14);
  EXPECT_NEAR(l2_norm_sq(k2), 1.0 / 9.0, 1e-13);
}

TEST(Kernels, IndicatorUpper) {
  Kernel k = indicator_upper({0.25, 0.5});
  std::vector<double> in{0.3, 0.7}, out{0.3, 0.4};
  EXPECT_DOUBLE_EQ(k(in), 1.0);
  EXPECT_DOUBLE_EQ(k(out), 0.0);
  EXPECT_NEAR(kernel_integral(k), 0.75 * 0.5, 1e-14);
  EXPECT_TRUE(k.is_indicator());
  Box b = k.indicator_box();
  EXPECT_DOUBLE_EQ(b.lo[0], 0.25);
  EXPECT_DOUBLE_EQ(b.lo[1], 0.5);
  EXPECT_DOUBLE_EQ(b.hi[0], 1.0);
  EXPECT_THROW(indicator_upper({1.0}), BadRange);
  EXPECT_THROW(indicator_upper({-0.1}), BadRange);
}

// <1_{[s,1]}, 1_{[t,1]}> = prod_k (1 - max(s_k, t_k)).
TEST(Kernels, IndicatorInnerProduct) {
  Kernel a = indicator_upper({0.2, 0.6});
  Kernel b = indicator_upper({0.5, 0.3});
  EXPECT_NEAR(inner_product(a, b), 0.5 * 0.4, 1e-14);
  EXPECT_NEAR(inner_product(a, a), 0.8 * 0.4, 1e-14);
}

TEST(Kernels, DilatePreservesMassScaling) {
  Kernel k = triangular_kernel(2);
  Kernel k4 = dilate(k, 4.0);
  // volume dilation multiplies integrals of K and K^2 by the factor
  EXPECT_NEAR(kernel_integral(k4), 4.0 * kernel_integral(k), 1e-12);
  EXPECT_NEAR(l2_norm_sq(k4), 4.0 * l2_norm_sq(k), 1e-12);
  // support side stretches by 4^(1/2) = 2
  EXPECT_NEAR(k4.support().hi[0], 2.0, 1e-14);
  // profile value carried along: K4(x) = K(x / 2)
  std::vector<double> x{1.0, 1.0}, half{0.5, 0.5};
  EXPECT_NEAR(k4(x), k(half), 1e-14);
  EXPECT_THROW(dilate(k, 0.0), BadRange);
}

TEST(Kernels, NegateAndCombine) {
  Kernel u = uniform_kernel(1);
  Kernel t = triangular_kernel(1);
  Kernel nu = negate(u);
  std::vector<double> x{0.4};
  EXPECT_DOUBLE_EQ(nu(x), -1.0);
  EXPECT_NEAR(kernel_integral(nu), -1.0, 1e-14);

  Kernel c = combine(2.0, u, -3.0, t);
  EXPECT_NEAR(c(x), 2.0 - 3.0 * t(x), 1e-14);
  EXPECT_THROW(combine(1.0, uniform_kernel(2), 1.0, uniform_kernel(2)), DimensionUnsupported);
}

TEST(Kernels, PolynomialKernel) {
  // 6x(1-x) on [0,1]: integral 1, value 1.5 at x = 1/2
  Kernel k = polynomial_kernel({0.0, 6.0, -6.0}, 1, "parabolic");
  std::vector<double> mid{0.5};
  EXPECT_NEAR(k(mid), 1.5, 1e-14);
  EXPECT_NEAR(kernel_integral(k), 1.0, 1e-14);
  EXPECT_EQ(k.label(), "parabolic");
  EXPECT_FALSE(k.is_indicator());
}

TEST(Kernels, EvaluationChecksDimension) {
  Kernel k = uniform_kernel(2);
  std::vector<double> x{0.5};
  EXPECT_THROW(k(x), DimensionUnsupported);
}

TEST(Family, BasicInvariants) {
  KernelFamily fam({uniform_kernel(1), triangular_kernel(1)});
  EXPECT_EQ(fam.size(), 2);
  EXPECT_EQ(fam.dim(), 1);
  EXPECT_FALSE(fam.indicator_anchors().has_value());
  EXPECT_THROW(KernelFamily({uniform_kernel(1), uniform_kernel(2)}), DimensionUnsupported);
  EXPECT_THROW(KernelFamily({}), ConfigInvalid);
}

TEST(Family, IndicatorAnchorsRoundTrip) {
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75};
  KernelFamily fam = indicator_family(grid);
  auto anchors = fam.indicator_anchors();
  ASSERT_TRUE(anchors.has_value());
  ASSERT_EQ(anchors->size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_DOUBLE_EQ((*anchors)[i][0], grid[i]);

  std::vector<std::vector<double>> grid2{{0.0, 0.5}, {0.25, 0.25}};
  KernelFamily fam2 = indicator_family(grid2);
  auto anchors2 = fam2.indicator_anchors();
  ASSERT_TRUE(anchors2.has_value());
  EXPECT_DOUBLE_EQ((*anchors2)[1][0], 0.25);
}

}  // namespace
