#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/kernels.hpp"
#include "ulep/rng.hpp"

namespace ulep {

struct ConditionVerdict {
  bool pass = true;
  std::string witness;  // empty when the condition holds
};

/// Bandwidth-sequence report for the power law h_n = c * n^{-a}.
///
/// hv1: h_n decreasing to 0, h_n in (0,1) on the range, n*h_n nondecreasing
///      and divergent.  hv2: n*h_n / log n divergent.  hv3: log(1/h_n) /
///      loglog n divergent.  Limits are decided symbolically from (c, a);
///      range membership is scanned for finite-n witnesses.
struct CrsReport {
  double c = 0.0, a = 0.0;
  long long n_lo = 0, n_hi = 0;
  ConditionVerdict hv1, hv2, hv3;
};

inline CrsReport check_crs(double c, double a, long long n_lo, long long n_hi) {
  if (!(c > 0.0)) throw BadRange("crs: c must be > 0");
  if (!(n_lo >= 2 && n_lo <= n_hi)) throw BadRange("crs: need 2 <= n_lo <= n_hi");
  CrsReport r;
  r.c = c;
  r.a = a;
  r.n_lo = n_lo;
  r.n_hi = n_hi;

  auto h = [&](double n) { return c * std::pow(n, -a); };
  auto fail = [](ConditionVerdict& v, const std::string& why) {
    if (v.pass) {
      v.pass = false;
      v.witness = why;
    }
  };

  // membership scan over a log-spaced net plus the endpoints
  std::vector<long long> probes{n_lo, n_hi};
  for (double t = std::log(static_cast<double>(n_lo)); t < std::log(static_cast<double>(n_hi));
       t += 0.5)
    probes.push_back(static_cast<long long>(std::exp(t)));
  for (long long n : probes) {
    double hn = h(static_cast<double>(n));
    if (!(hn > 0.0 && hn < 1.0)) {
      std::ostringstream os;
      os << "h_n = " << hn << " outside (0,1) at n = " << n;
      fail(r.hv1, os.str());
      break;
    }
  }

  if (!(a > 0.0)) fail(r.hv1, "a <= 0: h_n does not decrease to 0");
  if (!(a < 1.0)) {
    std::ostringstream os;
    os << "a >= 1: n*h_n = " << n_lo * h(static_cast<double>(n_lo)) << " at n = " << n_lo
       << " and " << n_hi * h(static_cast<double>(n_hi)) << " at n = " << n_hi
       << " (not divergent)";
    fail(r.hv1, os.str());
    fail(r.hv2, "a >= 1: n*h_n / log n tends to 0 or stays bounded");
  }
  if (!(a > 0.0)) fail(r.hv3, "a <= 0: log(1/h_n) stays bounded, h_n constant or growing");
  return r;
}

/// Advisory numeric report on a kernel family's shape assumptions: L2
/// translation/dilation moduli over shrinking nets, the largest |K| seen,
/// and support violations outside the unit cube. Never a hard gate.
struct FamilyAssumptionReport {
  std::vector<double> shift_net;
  std::vector<double> translation_modulus;   // sup over the family, per shift
  std::vector<double> dilation_net;
  std::vector<double> dilation_modulus;      // sup over the family, per lambda
  double sampled_abs_max = 0.0;
  double declared_abs_max = 0.0;
  long long exterior_violations = 0;
  long long exterior_probes = 0;
};

namespace detail {

// Midpoint rule for the squared-difference integrals: the integrands jump
// at indicator edges, where midpoint's O(1/N) beats any fixed polynomial
// rule that straddles the jump.
inline double shift_l2_sq(const Kernel& k, double u, int nodes_per_axis) {
  int d = k.dim();
  Box sup = k.support();
  std::vector<double> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = std::min(sup.lo[a], sup.lo[a] - u) - 0.05;
    hi[a] = std::max(sup.hi[a], sup.hi[a] - u) + 0.05;
  }
  long long total = 1;
  for (int a = 0; a < d; ++a) total *= nodes_per_axis;
  std::vector<double> x(d), xs(d);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= hi[a] - lo[a];
  double acc = 0.0;
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int a = d - 1; a >= 0; --a) {
      long long i = rest % nodes_per_axis;
      rest /= nodes_per_axis;
      x[a] = lo[a] + (hi[a] - lo[a]) * (static_cast<double>(i) + 0.5) / nodes_per_axis;
      xs[a] = x[a] + u;
    }
    double diff = k(x) - k(xs);
    acc += diff * diff;
  }
  return acc / static_cast<double>(total) * vol;
}

inline double dilation_l2_sq(const Kernel& k, double lambda, int nodes_per_axis) {
  int d = k.dim();
  Box sup = k.support();
  std::vector<double> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = std::min(sup.lo[a], sup.lo[a] / lambda) - 0.05;
    hi[a] = std::max(sup.hi[a], sup.hi[a] / lambda) + 0.05;
  }
  long long total = 1;
  for (int a = 0; a < d; ++a) total *= nodes_per_axis;
  std::vector<double> x(d), xl(d);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= hi[a] - lo[a];
  double acc = 0.0;
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int a = d - 1; a >= 0; --a) {
      long long i = rest % nodes_per_axis;
      rest /= nodes_per_axis;
      x[a] = lo[a] + (hi[a] - lo[a]) * (static_cast<double>(i) + 0.5) / nodes_per_axis;
      xl[a] = lambda * x[a];
    }
    double diff = k(xl) - k(x);
    acc += diff * diff;
  }
  return acc / static_cast<double>(total) * vol;
}

}  // namespace detail

inline FamilyAssumptionReport check_family_assumptions(const KernelFamily& family,
                                                       long long probes = 200000,
                                                       std::uint64_t seed = 0) {
  if (probes < 100) throw BadRange("assumption check: need >= 100 probes");
  FamilyAssumptionReport rep;
  rep.shift_net = {0.2, 0.1, 0.05, 0.025, 0.0125};
  rep.dilation_net = {1.2, 1.1, 1.05, 1.025, 1.0};

  int d = family.dim();
  int nodes = static_cast<int>(std::llround(std::pow(static_cast<double>(probes), 1.0 / d)));
  nodes = std::max(64, nodes);

  for (double u : rep.shift_net) {
    double worst = 0.0;
    for (const Kernel& k : family.kernels())
      worst = std::max(worst, detail::shift_l2_sq(k, u, nodes));
    rep.translation_modulus.push_back(std::sqrt(worst));
  }
  for (double lam : rep.dilation_net) {
    double worst = 0.0;
    for (const Kernel& k : family.kernels())
      worst = std::max(worst, detail::dilation_l2_sq(k, lam, nodes));
    rep.dilation_modulus.push_back(std::sqrt(worst));
  }

  for (const Kernel& k : family.kernels())
    rep.declared_abs_max = std::max(rep.declared_abs_max, k.declared_abs_max());

  Rng rng(derive_seed(seed, 0xa55));
  std::vector<double> x(d);
  for (long long i = 0; i < probes; ++i) {
    for (int a = 0; a < d; ++a) x[a] = rng.uniform();
    for (const Kernel& k : family.kernels())
      rep.sampled_abs_max = std::max(rep.sampled_abs_max, std::abs(k(x)));
  }

  // support check: points outside the unit cube, including the fixed probe
  // (2, ..., 2), must evaluate to zero
  std::vector<std::vector<double>> exterior;
  exterior.push_back(std::vector<double>(d, 2.0));
  for (long long i = 0; i < probes / 10; ++i) {
    std::vector<double> p(d);
    int push_axis = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d));
    for (int a = 0; a < d; ++a) p[a] = rng.uniform(-1.5, 2.5);
    if (p[push_axis] >= 0.0 && p[push_axis] <= 1.0)
      p[push_axis] = (rng.uniform() < 0.5) ? p[push_axis] - 1.5 : p[push_axis] + 1.5;
    exterior.push_back(std::move(p));
  }
  Box unit(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
  for (const auto& p : exterior) {
    if (unit.contains(p)) continue;
    ++rep.exterior_probes;
    for (const Kernel& k : family.kernels())
      if (k(p) != 0.0) {
        ++rep.exterior_violations;
        break;
      }
  }
  return rep;
}

}  // namespace ulep
