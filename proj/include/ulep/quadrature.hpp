#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "ulep/common.hpp"

namespace ulep {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {

// Nodes by Newton iteration on P_n from the Chebyshev initial guess.
// Standard construction; accurate to ~1e-15 for the orders used here.
inline GaussLegendre build_gauss_legendre(int n) {
  if (n < 1) throw QuadratureFailure("gauss_legendre: order must be >= 1");
  GaussLegendre rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = x;
    rule.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

}  // namespace detail

inline const GaussLegendre& gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
  return it->second;
}

inline double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussLegendre& rule = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a), acc = 0.0;
  for (int i = 0; i < n; ++i) acc += rule.w[i] * f(mid + half * rule.x[i]);
  double out = acc * half;
  if (!std::isfinite(out)) throw QuadratureFailure("integrate_gl: non-finite result");
  return out;
}

/// Piecewise polynomial on [breaks.front(), breaks.back()], zero outside.
/// Coefficients are in the global coordinate, ascending powers. This is the
/// representation behind every registry kernel profile, so kernel-only
/// integrals reduce to per-piece Gauss-Legendre at exact order.
struct Piecewise1d {
  std::vector<double> breaks;               // m+1 increasing knots
  std::vector<std::vector<double>> coef;    // m pieces

  int pieces() const { return static_cast<int>(coef.size()); }

  int degree() const {
    int d = 0;
    for (const auto& c : coef) d = std::max(d, static_cast<int>(c.size()) - 1);
    return d;
  }

  double lo() const { return breaks.front(); }
  double hi() const { return breaks.back(); }

  void validate() const {
    if (breaks.size() < 2 || coef.size() + 1 != breaks.size())
      throw Error("piecewise: inconsistent knot/piece counts");
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
      if (!(breaks[j] < breaks[j + 1])) throw Error("piecewise: knots must increase");
  }

  // Evaluation: closed pieces, ties at interior knots resolved to the right
  // piece; both support endpoints included.
  double operator()(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    std::size_t j = std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin();
    if (j == 0) return 0.0;
    if (j >= breaks.size()) j = breaks.size() - 1;
    const std::vector<double>& c = coef[j - 1];
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  }
};

inline Piecewise1d pp_constant(double value, double a = 0.0, double b = 1.0) {
  Piecewise1d p;
  p.breaks = {a, b};
  p.coef = {{value}};
  return p;
}

// Single polynomial piece with the given ascending coefficients on [a, b].
inline Piecewise1d pp_poly(std::vector<double> coefs, double a = 0.0, double b = 1.0) {
  Piecewise1d p;
  p.breaks = {a, b};
  p.coef = {std::move(coefs)};
  return p;
}

// 0/1 step profile on [a, b] inside the ambient interval [0, 1].
inline Piecewise1d pp_step(double a, double b) {
  if (!(0.0 <= a && a < b && b <= 1.0)) throw BadRange("pp_step: need 0 <= a < b <= 1");
  Piecewise1d p;
  p.breaks.push_back(0.0);
  p.coef = {};
  if (a > 0.0) {
    p.breaks.push_back(a);
    p.coef.push_back({0.0});
  }
  p.breaks.push_back(b);
  p.coef.push_back({1.0});
  if (b < 1.0) {
    p.breaks.push_back(1.0);
    p.coef.push_back({0.0});
  }
  return p;
}

namespace detail {

inline std::vector<double> merge_knots(const Piecewise1d& p, const Piecewise1d& q, double lo,
                                       double hi) {
  std::vector<double> k;
  for (double b : p.breaks)
    if (b > lo && b < hi) k.push_back(b);
  for (double b : q.breaks)
    if (b > lo && b < hi) k.push_back(b);
  k.push_back(lo);
  k.push_back(hi);
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end(),
                      [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(a)); }),
          k.end());
  return k;
}

inline double eval_poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
  return acc;
}

}  // namespace detail

// Exact integral: per-piece Gauss-Legendre at the order needed by the degree.
inline double pp_integral(const Piecewise1d& p) {
  double acc = 0.0;
  for (int j = 0; j < p.pieces(); ++j) {
    const std::vector<double>& c = p.coef[j];
    double a = p.breaks[j], b = p.breaks[j + 1];
    for (std::size_t k = 0; k < c.size(); ++k)
      acc += c[k] * (std::pow(b, k + 1) - std::pow(a, k + 1)) / static_cast<double>(k + 1);
  }
  return acc;
}

// Integral of p over [a, b] (clipped to the support), exact.
inline double pp_integral_on(const Piecewise1d& p, double a, double b) {
  a = std::max(a, p.lo());
  b = std::min(b, p.hi());
  if (!(a < b)) return 0.0;
  double acc = 0.0;
  for (int j = 0; j < p.pieces(); ++j) {
    double lo = std::max(a, p.breaks[j]), hi = std::min(b, p.breaks[j + 1]);
    if (!(lo < hi)) continue;
    const std::vector<double>& c = p.coef[j];
    for (std::size_t k = 0; k < c.size(); ++k)
      acc += c[k] * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / static_cast<double>(k + 1);
  }
  return acc;
}

// Integral of the product p*q, exact via merged knots and GL of sufficient
// order on each merged piece.
inline double pp_product_integral(const Piecewise1d& p, const Piecewise1d& q) {
  double lo = std::max(p.lo(), q.lo()), hi = std::min(p.hi(), q.hi());
  if (!(lo < hi)) return 0.0;
  std::vector<double> knots = detail::merge_knots(p, q, lo, hi);
  int order = std::max(2, (p.degree() + q.degree()) / 2 + 1);
  const GaussLegendre& rule = gauss_legendre(order);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    double mid = 0.5 * (knots[j] + knots[j + 1]), half = 0.5 * (knots[j + 1] - knots[j]);
    if (half <= 0.0) continue;
    double piece = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double x = mid + half * rule.x[i];
      piece += rule.w[i] * p(x) * q(x);
    }
    acc += piece * half;
  }
  return acc;
}

// Integral of p(x) f(x) with a smooth weight f: per-piece GL at `nodes`.
inline double pp_weighted_integral(const Piecewise1d& p, const std::function<double(double)>& f,
                                   int nodes) {
  if (nodes < 2) throw QuadratureFailure("pp_weighted_integral: need >= 2 nodes");
  const GaussLegendre& rule = gauss_legendre(nodes);
  double acc = 0.0;
  for (int j = 0; j < p.pieces(); ++j) {
    double mid = 0.5 * (p.breaks[j] + p.breaks[j + 1]);
    double half = 0.5 * (p.breaks[j + 1] - p.breaks[j]);
    double piece = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double x = mid + half * rule.x[i];
      piece += rule.w[i] * detail::eval_poly(p.coef[j], x) * f(x);
    }
    acc += piece * half;
  }
  if (!std::isfinite(acc)) throw QuadratureFailure("pp_weighted_integral: non-finite result");
  return acc;
}

inline Piecewise1d pp_scale(const Piecewise1d& p, double s) {
  Piecewise1d out = p;
  for (auto& c : out.coef)
    for (double& v : c) v *= s;
  return out;
}

// a*p + b*q on merged knots over the union of supports.
inline Piecewise1d pp_combine(double wa, const Piecewise1d& p, double wb, const Piecewise1d& q) {
  double lo = std::min(p.lo(), q.lo()), hi = std::max(p.hi(), q.hi());
  std::vector<double> knots = detail::merge_knots(p, q, lo, hi);
  Piecewise1d out;
  out.breaks = knots;
  out.coef.resize(knots.size() - 1);
  std::size_t deg = 0;
  for (const auto& c : p.coef) deg = std::max(deg, c.size());
  for (const auto& c : q.coef) deg = std::max(deg, c.size());
  for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
    std::vector<double> c(deg, 0.0);
    double probe = 0.5 * (knots[j] + knots[j + 1]);
    auto accumulate = [&](double w, const Piecewise1d& r) {
      if (probe < r.lo() || probe > r.hi()) return;
      std::size_t piece = std::upper_bound(r.breaks.begin(), r.breaks.end(), probe) -
                          r.breaks.begin();
      if (piece == 0 || piece >= r.breaks.size()) return;
      const std::vector<double>& rc = r.coef[piece - 1];
      for (std::size_t k = 0; k < rc.size(); ++k) c[k] += w * rc[k];
    };
    accumulate(wa, p);
    accumulate(wb, q);
    out.coef[j] = std::move(c);
  }
  return out;
}

// Dilation x -> p(x / s): knots scale by s, coefficient k divides by s^k.
inline Piecewise1d pp_dilate(const Piecewise1d& p, double s) {
  if (!(s > 0.0)) throw BadRange("pp_dilate: scale must be > 0");
  Piecewise1d out = p;
  for (double& b : out.breaks) b *= s;
  for (auto& c : out.coef) {
    double div = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] /= div;
      div *= s;
    }
  }
  return out;
}

// Largest |p| over the support: piece endpoints plus a dense scan. Exact for
// the low-degree registry profiles for all practical purposes.
inline double pp_max_abs(const Piecewise1d& p) {
  double m = 0.0;
  const int kScan = 512;
  for (int j = 0; j < p.pieces(); ++j) {
    double a = p.breaks[j], b = p.breaks[j + 1];
    for (int i = 0; i <= kScan; ++i) {
      double x = a + (b - a) * static_cast<double>(i) / kScan;
      m = std::max(m, std::abs(detail::eval_poly(p.coef[j], x)));
    }
  }
  return m;
}

}  // namespace ulep
