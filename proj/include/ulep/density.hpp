#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>

#include "ulep/common.hpp"
#include "ulep/rng.hpp"

namespace ulep {

namespace detail {

struct DensityImpl {
  virtual ~DensityImpl() = default;
  virtual int dim() const = 0;
  virtual double pdf(std::span<const double> x) const = 0;
  virtual void sample_point(Rng& rng, std::span<double> out) const = 0;
  virtual Box support() const = 0;
  virtual Box positivity_box() const = 0;
  virtual double f_min() const = 0;
  // Exact probability of an axis box where the law allows it; implementations
  // without a closed form do not exist in the current zoo.
  virtual double box_prob(const Box& b) const = 0;
  virtual std::string describe() const = 0;
};

struct UniformBoxImpl final : DensityImpl {
  Box box;
  double height;

  explicit UniformBoxImpl(Box b) : box(std::move(b)) {
    double v = box.volume();
    if (!(v > 0.0)) throw DegenerateRegion("uniform density: zero-volume support");
    height = 1.0 / v;
  }

  int dim() const override { return box.dim(); }

  double pdf(std::span<const double> x) const override {
    return box.contains(x) ? height : 0.0;
  }

  void sample_point(Rng& rng, std::span<double> out) const override {
    for (int k = 0; k < box.dim(); ++k) out[k] = rng.uniform(box.lo[k], box.hi[k]);
  }

  Box support() const override { return box; }
  // Constant on the open interior, so the whole interior certifies
  // positivity at the flat height.
  Box positivity_box() const override { return box; }
  double f_min() const override { return height; }

  double box_prob(const Box& b) const override {
    return intersect(b, box).volume() * height;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "uniform on box";
    for (int k = 0; k < box.dim(); ++k) os << " [" << box.lo[k] << "," << box.hi[k] << "]";
    return os.str();
  }
};

struct Normal1dImpl final : DensityImpl {
  double mu, sigma;

  Normal1dImpl(double m, double s) : mu(m), sigma(s) {
    if (!(sigma > 0.0)) throw NonPositiveDensity("normal density: sigma must be > 0");
  }

  int dim() const override { return 1; }

  double pdf(std::span<const double> x) const override {
    double z = (x[0] - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005);
  }

  void sample_point(Rng& rng, std::span<double> out) const override {
    out[0] = mu + sigma * rng.normal();
  }

  // Effective support for window quadrature; mass beyond 12 sigma is far
  // below every tolerance in play.
  Box support() const override { return make_box1(mu - 12.0 * sigma, mu + 12.0 * sigma); }
  Box positivity_box() const override { return make_box1(mu - 5.0 * sigma, mu + 5.0 * sigma); }
  double f_min() const override {
    double edge[1] = {mu + 5.0 * sigma};
    return pdf(edge);
  }

  double box_prob(const Box& b) const override {
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sigma * 1.4142135623730951)); };
    return std::max(0.0, cdf(b.hi[0]) - cdf(b.lo[0]));
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "normal(mu=" << mu << ", sigma=" << sigma << ")";
    return os.str();
  }
};

}  // namespace detail

/// Sampling law with an evaluable pdf, a seeded sampler, and a certificate
/// box on which the pdf stays above a positive floor.
class DensityModel {
 public:
  explicit DensityModel(std::shared_ptr<const detail::DensityImpl> impl) : impl_(std::move(impl)) {}

  int dim() const { return impl_->dim(); }
  double pdf(std::span<const double> x) const { return impl_->pdf(x); }
  void sample_point(Rng& rng, std::span<double> out) const { impl_->sample_point(rng, out); }
  Box support() const { return impl_->support(); }
  Box positivity_box() const { return impl_->positivity_box(); }
  double f_min() const { return impl_->f_min(); }
  double box_prob(const Box& b) const { return impl_->box_prob(b); }
  std::string describe() const { return impl_->describe(); }

  bool is_uniform_box() const {
    return dynamic_cast<const detail::UniformBoxImpl*>(impl_.get()) != nullptr;
  }

 private:
  std::shared_ptr<const detail::DensityImpl> impl_;
};

inline DensityModel uniform_density(const Box& b) {
  return DensityModel(std::make_shared<detail::UniformBoxImpl>(b));
}

inline DensityModel normal_density(double mu, double sigma) {
  return DensityModel(std::make_shared<detail::Normal1dImpl>(mu, sigma));
}

}  // namespace ulep
