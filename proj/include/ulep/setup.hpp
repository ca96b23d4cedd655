#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/config.hpp"
#include "ulep/density.hpp"
#include "ulep/harness.hpp"
#include "ulep/kernels.hpp"

namespace ulep {

/// Anchors parse as semicolon-separated points with comma-separated
/// coordinates: "0;0.25;0.5" in one dimension, "0,0;0.5,0.5" in two.
inline std::vector<std::vector<double>> parse_anchor_list(const std::string& text) {
  std::vector<std::vector<double>> anchors;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    std::vector<double> point;
    std::istringstream pin(part);
    std::string coord;
    while (std::getline(pin, coord, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(coord, &used);
        while (used < coord.size() && (coord[used] == ' ' || coord[used] == '\t')) ++used;
        if (used != coord.size()) throw std::invalid_argument(coord);
        point.push_back(v);
      } catch (const std::exception&) {
        throw ConfigInvalid("anchor list: bad coordinate '" + coord + "'");
      }
    }
    if (point.empty()) throw ConfigInvalid("anchor list: empty anchor entry");
    anchors.push_back(std::move(point));
  }
  if (anchors.empty()) throw ConfigInvalid("anchor list: no anchors given");
  return anchors;
}

inline Box box_from_config(const Config& cfg, const std::string& prefix) {
  std::vector<double> lo = cfg.get_doubles(prefix + "lo");
  std::vector<double> hi = cfg.get_doubles(prefix + "hi");
  if (lo.size() != hi.size())
    throw ConfigInvalid(prefix + "lo and " + prefix + "hi must have equal length");
  return Box(lo, hi);
}

inline DensityModel density_from_config(const Config& cfg) {
  std::string kind = cfg.get_string("density.kind", "uniform");
  if (kind == "uniform") return uniform_density(box_from_config(cfg, "density."));
  if (kind == "normal")
    return normal_density(cfg.get_double("density.mu", 0.0), cfg.get_double("density.sigma", 1.0));
  throw ConfigInvalid("density.kind must be 'uniform' or 'normal', got: " + kind);
}

inline Kernel kernel_from_config(const Config& cfg, const std::string& prefix = "kernel.") {
  std::string kind = cfg.get_string(prefix + "kind", "uniform");
  int d = static_cast<int>(cfg.get_size(prefix + "dim", 1));
  if (kind == "uniform") return uniform_kernel(d);
  if (kind == "triangular") return triangular_kernel(d);
  if (kind == "indicator_upper") return indicator_upper(cfg.get_doubles(prefix + "s"));
  if (kind == "indicator_box") {
    std::vector<double> lo = cfg.get_doubles(prefix + "lo");
    std::vector<double> hi = cfg.get_doubles(prefix + "hi");
    if (lo.size() != hi.size()) throw ConfigInvalid(prefix + "lo/hi length mismatch");
    return indicator_kernel(Box(lo, hi));
  }
  if (kind == "polynomial")
    return polynomial_kernel(cfg.get_doubles(prefix + "coeffs"), d, "polynomial");
  throw ConfigInvalid(prefix + "kind not recognized: " + kind);
}

inline KernelFamily family_from_config(const Config& cfg) {
  std::string kind = cfg.get_string("family.kind", "indicator");
  QuadratureSpec quad;
  quad.nodes_per_axis = static_cast<int>(cfg.get_size("family.quad_nodes", 64));
  if (kind == "indicator")
    return indicator_family(parse_anchor_list(cfg.get_string("family.anchors")), quad);
  if (kind == "single") return KernelFamily({kernel_from_config(cfg)}, quad);
  throw ConfigInvalid("family.kind must be 'indicator' or 'single', got: " + kind);
}

inline ExperimentConfig experiment_from_config(const Config& cfg) {
  ExperimentConfig e(density_from_config(cfg), family_from_config(cfg),
                     box_from_config(cfg, "region."));
  e.a_lo = cfg.get_double("bandwidth.a_lo", 0.3);
  e.a_hi = cfg.get_double("bandwidth.a_hi", 0.7);
  e.rho = cfg.get_double("grid.rho", 1.1);
  e.delta = cfg.get_double("grid.delta", 0.5);
  std::vector<std::size_t> ns = cfg.get_sizes("study.n");
  e.n_list.assign(ns.begin(), ns.end());
  e.replications = static_cast<int>(cfg.get_size("study.replications", 1));
  e.seed = static_cast<std::uint64_t>(cfg.get_int("study.seed", 0));
  e.validate();
  return e;
}

}  // namespace ulep
