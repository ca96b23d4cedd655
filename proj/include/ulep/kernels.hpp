#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/quadrature.hpp"

namespace ulep {

/// Window-shape function on the unit cube: a tensor product of per-axis
/// piecewise-polynomial profiles. Every registry shape lives here, which is
/// what makes shape-only integrals exact and lets assumption checks reason
/// about supports instead of sampling blindly.
class Kernel {
 public:
  Kernel(std::string label, std::vector<Piecewise1d> axes)
      : label_(std::move(label)), axes_(std::move(axes)) {
    if (axes_.empty()) throw DimensionUnsupported("kernel: need dimension >= 1");
    for (const auto& p : axes_) p.validate();
    abs_max_ = 1.0;
    for (const auto& p : axes_) abs_max_ *= pp_max_abs(p);
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::string& label() const { return label_; }
  const Piecewise1d& axis(int k) const { return axes_[k]; }

  double operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
      throw DimensionUnsupported("kernel: point dimension mismatch");
    double v = 1.0;
    for (int k = 0; k < dim(); ++k) {
      v *= axes_[k](x[k]);
      if (v == 0.0) return 0.0;
    }
    return v;
  }

  Box support() const {
    std::vector<double> lo(dim()), hi(dim());
    for (int k = 0; k < dim(); ++k) {
      lo[k] = axes_[k].lo();
      hi[k] = axes_[k].hi();
    }
    return Box(std::move(lo), std::move(hi));
  }

  // Bound on |K| derived from the profile pieces; reported to the
  // assumption checker alongside sampled maxima.
  double declared_abs_max() const { return abs_max_; }

  // All axes are 0/1 step profiles: the kernel is the indicator of a box.
  bool is_indicator() const {
    for (const auto& p : axes_) {
      for (const auto& c : p.coef) {
        if (c.size() != 1) return false;
        if (c[0] != 0.0 && c[0] != 1.0) return false;
      }
      bool has_one = false;
      for (const auto& c : p.coef) has_one |= (c[0] == 1.0);
      if (!has_one) return false;
      // the 1-region must be a single contiguous run of pieces
      int runs = 0;
      bool in_run = false;
      for (const auto& c : p.coef) {
        if (c[0] == 1.0 && !in_run) {
          ++runs;
          in_run = true;
        } else if (c[0] == 0.0) {
          in_run = false;
        }
      }
      if (runs != 1) return false;
    }
    return true;
  }

  // The box whose indicator this kernel is (requires is_indicator()).
  Box indicator_box() const {
    std::vector<double> lo(dim()), hi(dim());
    for (int k = 0; k < dim(); ++k) {
      const Piecewise1d& p = axes_[k];
      bool found = false;
      for (int j = 0; j < p.pieces(); ++j) {
        if (p.coef[j][0] == 1.0) {
          if (!found) lo[k] = p.breaks[j];
          hi[k] = p.breaks[j + 1];
          found = true;
        }
      }
      if (!found) throw Error("indicator_box: kernel is not an indicator");
    }
    return Box(std::move(lo), std::move(hi));
  }

 private:
  std::string label_;
  std::vector<Piecewise1d> axes_;
  double abs_max_ = 1.0;
};

// ---- registry ------------------------------------------------------------

inline Kernel uniform_kernel(int d) {
  std::vector<Piecewise1d> axes(d, pp_constant(1.0));
  return Kernel("uniform", std::move(axes));
}

// Tent profile 1 - |2x - 1| on each axis.
inline Kernel triangular_kernel(int d) {
  Piecewise1d tent;
  tent.breaks = {0.0, 0.5, 1.0};
  tent.coef = {{0.0, 2.0}, {2.0, -2.0}};
  std::vector<Piecewise1d> axes(d, tent);
  return Kernel("triangular", std::move(axes));
}

// Indicator of the box [b.lo, b.hi], each axis inside [0, 1].
inline Kernel indicator_kernel(const Box& b) {
  std::vector<Piecewise1d> axes;
  axes.reserve(b.dim());
  for (int k = 0; k < b.dim(); ++k) axes.push_back(pp_step(b.lo[k], b.hi[k]));
  return Kernel("indicator", std::move(axes));
}

// Indicator of the upper box [s, 1]; the shape family behind the limit-set
// machinery.
inline Kernel indicator_upper(const std::vector<double>& s) {
  std::vector<double> ones(s.size(), 1.0);
  for (double v : s)
    if (!(v >= 0.0 && v < 1.0)) throw BadRange("indicator_upper: anchors must lie in [0, 1)");
  Kernel k = indicator_kernel(Box(s, ones));
  return k;
}

// Same 1-d polynomial profile on every axis, ascending coefficients.
inline Kernel polynomial_kernel(std::vector<double> coefs, int d,
                                const std::string& label = "polynomial") {
  if (coefs.empty()) throw Error("polynomial_kernel: empty coefficients");
  std::vector<Piecewise1d> axes(d, pp_poly(coefs));
  return Kernel(label, std::move(axes));
}

// Volume dilation x -> K(x / factor^{1/d}); support grows accordingly.
inline Kernel dilate(const Kernel& k, double volume_factor) {
  if (!(volume_factor > 0.0)) throw BadRange("dilate: factor must be > 0");
  double s = std::pow(volume_factor, 1.0 / k.dim());
  std::vector<Piecewise1d> axes;
  axes.reserve(k.dim());
  for (int a = 0; a < k.dim(); ++a) axes.push_back(pp_dilate(k.axis(a), s));
  return Kernel(k.label() + "-dilated", std::move(axes));
}

inline Kernel negate(const Kernel& k) {
  std::vector<Piecewise1d> axes;
  axes.reserve(k.dim());
  for (int a = 0; a < k.dim(); ++a)
    axes.push_back(a == 0 ? pp_scale(k.axis(a), -1.0) : k.axis(a));
  return Kernel(k.label() + "-negated", std::move(axes));
}

// a*K1 + b*K2 for 1-d kernels (profile combination).
inline Kernel combine(double a, const Kernel& k1, double b, const Kernel& k2) {
  if (k1.dim() != 1 || k2.dim() != 1)
    throw DimensionUnsupported("combine: linear combinations only in dimension 1");
  return Kernel("combined", {pp_combine(a, k1.axis(0), b, k2.axis(0))});
}

// ---- exact shape integrals ----------------------------------------------

inline double kernel_integral(const Kernel& k) {
  double v = 1.0;
  for (int a = 0; a < k.dim(); ++a) v *= pp_integral(k.axis(a));
  return v;
}

/// Integral of K^2 over its support; exact through the product structure.
inline double l2_norm_sq(const Kernel& k) {
  double v = 1.0;
  for (int a = 0; a < k.dim(); ++a) v *= pp_product_integral(k.axis(a), k.axis(a));
  return v;
}

inline double inner_product(const Kernel& k1, const Kernel& k2) {
  if (k1.dim() != k2.dim()) throw DimensionUnsupported("inner_product: dimension mismatch");
  double v = 1.0;
  for (int a = 0; a < k1.dim(); ++a) v *= pp_product_integral(k1.axis(a), k2.axis(a));
  return v;
}

// ---- family ---------------------------------------------------------------

struct QuadratureSpec {
  int nodes_per_axis = 64;
  std::string scheme = "gauss-legendre";
};

/// Ordered, finite kernel family sharing one dimension and one quadrature
/// recipe for density-weighted expectations.
class KernelFamily {
 public:
  KernelFamily(std::vector<Kernel> kernels, QuadratureSpec quad = {})
      : kernels_(std::move(kernels)), quad_(quad) {
    if (kernels_.empty()) throw ConfigInvalid("family: need at least one kernel");
    if (quad_.nodes_per_axis < 2) throw ConfigInvalid("family: need >= 2 quadrature nodes");
    for (const Kernel& k : kernels_)
      if (k.dim() != kernels_.front().dim())
        throw DimensionUnsupported("family: kernels must share dimension");
  }

  int dim() const { return kernels_.front().dim(); }
  int size() const { return static_cast<int>(kernels_.size()); }
  const Kernel& at(int i) const { return kernels_[i]; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  const QuadratureSpec& quadrature() const { return quad_; }

  // Anchors s_i when every member is an upper-box indicator 1_{[s_i, 1]}.
  std::optional<std::vector<std::vector<double>>> indicator_anchors() const {
    std::vector<std::vector<double>> s;
    s.reserve(kernels_.size());
    for (const Kernel& k : kernels_) {
      if (!k.is_indicator()) return std::nullopt;
      Box b = k.indicator_box();
      for (int a = 0; a < k.dim(); ++a)
        if (std::abs(b.hi[a] - 1.0) > 1e-15) return std::nullopt;
      s.push_back(b.lo);
    }
    return s;
  }

 private:
  std::vector<Kernel> kernels_;
  QuadratureSpec quad_;
};

// Indicator family 1_{[s,1]} over a 1-d anchor grid.
inline KernelFamily indicator_family(const std::vector<double>& s_grid, QuadratureSpec quad = {}) {
  std::vector<Kernel> ks;
  ks.reserve(s_grid.size());
  for (double s : s_grid) ks.push_back(indicator_upper({s}));
  return KernelFamily(std::move(ks), quad);
}

inline KernelFamily indicator_family(const std::vector<std::vector<double>>& s_grid,
                                     QuadratureSpec quad = {}) {
  std::vector<Kernel> ks;
  ks.reserve(s_grid.size());
  for (const auto& s : s_grid) ks.push_back(indicator_upper(s));
  return KernelFamily(std::move(ks), quad);
}

}  // namespace ulep
