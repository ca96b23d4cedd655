#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ulep/density.hpp"
#include "ulep/harness.hpp"
#include "ulep/kernels.hpp"

namespace {

using namespace ulep;

KernelFamily sixteen_point_family() {
  std::vector<double> anchors;
  for (int i = 0; i < 16; ++i) anchors.push_back(i / 16.0);
  return indicator_family(anchors);
}

// Exhaustive maximal packing over the same pairwise-distance matrix the
// greedy pass used: the largest subset whose members stay eps apart.
int max_packing_bruteforce(const std::vector<std::vector<double>>& dist, double eps) {
  int p = static_cast<int>(dist.size());
  std::vector<unsigned> conflict(p, 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && dist[i][j] < eps) conflict[i] |= 1u << j;
  int best = 0;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    bool ok = true;
    for (int i = 0; i < p && ok; ++i)
      if ((mask >> i & 1u) && (mask & conflict[i])) ok = false;
    if (ok) best = std::max(best, __builtin_popcount(mask));
  }
  return best;
}

TEST(Covering, GreedyMatchesExhaustiveMaximum) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  CoveringReport rep = estimate_covering(fam, {0.2, 0.3, 0.5}, probe, 4000, 21);
  ASSERT_EQ(rep.n_hat.size(), 3u);
  for (std::size_t e = 0; e < rep.eps.size(); ++e) {
    EXPECT_EQ(rep.n_hat[e], max_packing_bruteforce(rep.dist, rep.eps[e])) << "eps=" << rep.eps[e];
    // the kept set must itself be an eps-separated packing, and maximal
    const std::vector<int>& kept = rep.chosen[e];
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b)
        EXPECT_GE(rep.dist[kept[a]][kept[b]], rep.eps[e]);
    for (int i = 0; i < fam.size(); ++i) {
      bool in_kept = false, far = true;
      for (int c : kept) {
        if (c == i) in_kept = true;
        if (rep.dist[i][c] < rep.eps[e]) far = false;
      }
      EXPECT_TRUE(in_kept || !far) << "point " << i << " could extend the packing";
    }
  }
}

TEST(Covering, PackingSizeShrinksWithEps) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  CoveringReport rep = estimate_covering(fam, {0.2, 0.3, 0.5}, probe, 4000, 21);
  EXPECT_GE(rep.n_hat[0], rep.n_hat[1]);
  EXPECT_GE(rep.n_hat[1], rep.n_hat[2]);
  // anchors i/16 under a uniform probe give adjacent separations near 1/4,
  // pinning the three packing sizes exactly
  EXPECT_EQ(rep.n_hat[0], 16);
  EXPECT_EQ(rep.n_hat[1], 8);
  EXPECT_EQ(rep.n_hat[2], 4);
  ASSERT_TRUE(rep.fit_done);
  EXPECT_GT(rep.v_hat, 0.0);
}

TEST(Covering, DistanceMatrixTracksExactL2) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  CoveringReport rep = estimate_covering(fam, {0.3}, probe, 200000, 5);
  // indicator windows [s_i, 1]: squared L2 distance is |s_i - s_j|
  EXPECT_NEAR(rep.dist[0][4], std::sqrt(0.25), 5e-3);
  EXPECT_NEAR(rep.dist[3][11], std::sqrt(0.5), 5e-3);
  EXPECT_DOUBLE_EQ(rep.dist[7][7], 0.0);
}

TEST(Covering, DeterministicInSeed) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  CoveringReport a = estimate_covering(fam, {0.3}, probe, 2000, 9);
  CoveringReport b = estimate_covering(fam, {0.3}, probe, 2000, 9);
  CoveringReport c = estimate_covering(fam, {0.3}, probe, 2000, 10);
  EXPECT_EQ(a.dist, b.dist);
  EXPECT_NE(a.dist, c.dist);
}

TEST(Covering, DeclaredGrowthComparison) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  // generous envelope 40 eps^-2 dominates every observed count
  CoveringReport ok =
      estimate_covering(fam, {0.2, 0.3, 0.5}, probe, 4000, 21, std::make_pair(40.0, 2.0));
  EXPECT_TRUE(ok.has_declared);
  EXPECT_TRUE(ok.declared_consistent);
  // c0 = 1 with no growth cannot admit sixteen points at eps = 0.2
  CoveringReport bad =
      estimate_covering(fam, {0.2, 0.3, 0.5}, probe, 4000, 21, std::make_pair(1.0, 0.0));
  EXPECT_FALSE(bad.declared_consistent);
}

TEST(Covering, RejectsBadArguments) {
  KernelFamily fam = sixteen_point_family();
  DensityModel probe = uniform_density(make_box1(0.0, 1.0));
  EXPECT_THROW(estimate_covering(fam, {0.3}, probe, 0, 1), ConfigInvalid);
  EXPECT_THROW(estimate_covering(fam, {0.0}, probe, 100, 1), ConfigInvalid);
  EXPECT_THROW(estimate_covering(fam, {1.0}, probe, 100, 1), ConfigInvalid);
  DensityModel probe2 = uniform_density(Box({0.0, 0.0}, {1.0, 1.0}));
  EXPECT_THROW(estimate_covering(fam, {0.3}, probe2, 100, 1), DimensionUnsupported);
}

}  // namespace
