#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ulep/quadrature.hpp"

namespace {

using namespace ulep;

// Gauss-Legendre with n nodes integrates polynomials up to degree 2n-1
// exactly; check against monomial integrals on [0, 1].
TEST(GaussLegendre, PolynomialExactness) {
  for (int n : {2, 4, 8, 16}) {
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double got = integrate_gl([deg](double x) { return std::pow(x, deg); }, 0.0, 1.0, n);
      EXPECT_NEAR(got, 1.0 / (deg + 1), 1e-13) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(GaussLegendre, NodesSymmetricWeightsSumTwo) {
  const GaussLegendre& g = gauss_legendre(12);
  double wsum = 0.0;
  for (std::size_t i = 0; i < g.w.size(); ++i) {
    wsum += g.w[i];
    EXPECT_NEAR(g.x[i], -g.x[g.x.size() - 1 - i], 1e-14);
  }
  EXPECT_NEAR(wsum, 2.0, 1e-13);
}

TEST(GaussLegendre, SmoothFunction) {
  double got = integrate_gl([](double x) { return std::exp(x); }, 0.0, 1.0, 16);
  EXPECT_NEAR(got, std::exp(1.0) - 1.0, 1e-13);
}

TEST(Piecewise, ConstantAndPoly) {
  Piecewise1d c = pp_constant(3.0, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(c(0.5), 3.0);
  EXPECT_DOUBLE_EQ(c(-0.1), 0.0);  // outside support evaluates to 0
  EXPECT_DOUBLE_EQ(pp_integral(c), 6.0);

  // 1 + 2x on [0,1]: integral 2
  Piecewise1d p = pp_poly({1.0, 2.0});
  EXPECT_DOUBLE_EQ(p(0.25), 1.5);
  EXPECT_NEAR(pp_integral(p), 2.0, 1e-14);
}

TEST(Piecewise, StepAndPartialIntegral) {
  Piecewise1d s = pp_step(0.25, 0.75);
  EXPECT_DOUBLE_EQ(s(0.5), 1.0);
  EXPECT_DOUBLE_EQ(s(0.1), 0.0);
  EXPECT_NEAR(pp_integral(s), 0.5, 1e-14);
  EXPECT_NEAR(pp_integral_on(s, 0.5, 2.0), 0.25, 1e-14);
  EXPECT_NEAR(pp_integral_on(s, -1.0, 0.3), 0.05, 1e-14);
  EXPECT_DOUBLE_EQ(pp_integral_on(s, 0.8, 0.9), 0.0);
}

TEST(Piecewise, ProductIntegral) {
  // tent profile against itself: int_0^1 (1-|2x-1|)^2 dx = 1/3
  Piecewise1d tent;
  tent.breaks = {0.0, 0.5, 1.0};
  tent.coef = {{0.0, 2.0}, {2.0, -2.0}};
  EXPECT_NEAR(pp_product_integral(tent, tent), 1.0 / 3.0, 1e-13);

  // step against polynomial: int_{1/4}^{3/4} x dx = 1/4
  Piecewise1d s = pp_step(0.25, 0.75);
  Piecewise1d x = pp_poly({0.0, 1.0});
  EXPECT_NEAR(pp_product_integral(s, x), 0.25, 1e-14);
}

TEST(Piecewise, WeightedIntegral) {
  Piecewise1d s = pp_step(0.0, 1.0);
  double got = pp_weighted_integral(s, [](double x) { return std::exp(x); }, 32);
  EXPECT_NEAR(got, std::exp(1.0) - 1.0, 1e-12);
}

TEST(Piecewise, ScaleCombineDilateMaxAbs) {
  Piecewise1d p = pp_poly({0.0, 1.0});           // x on [0,1]
  Piecewise1d q = pp_constant(1.0);              // 1 on [0,1]
  Piecewise1d sum = pp_combine(1.0, p, -2.0, q); // x - 2
  EXPECT_NEAR(sum(0.5), -1.5, 1e-14);
  EXPECT_NEAR(pp_integral(pp_scale(p, 3.0)), 1.5, 1e-14);

  // volume dilation by 4 in one axis stretches support to [0,4] and
  // preserves the profile values: q4(x) = q(x/4)
  Piecewise1d q4 = pp_dilate(q, 4.0);
  EXPECT_DOUBLE_EQ(q4(3.5), 1.0);
  EXPECT_NEAR(pp_integral(q4), 4.0, 1e-13);

  EXPECT_NEAR(pp_max_abs(sum), 2.0, 1e-12);
}

}  // namespace
