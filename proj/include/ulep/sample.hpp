#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/density.hpp"
#include "ulep/rng.hpp"

namespace ulep {

/// n x d observation matrix, row-major.
class Sample {
 public:
  Sample(int n, int d) : n_(n), d_(d), data_(static_cast<std::size_t>(n) * d, 0.0) {
    if (n < 0 || d < 1) throw DimensionUnsupported("sample: need n >= 0, d >= 1");
  }

  static Sample from_rows(const std::vector<std::vector<double>>& rows, int d) {
    Sample s(static_cast<int>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != d)
        throw DimensionUnsupported("sample: ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), s.row_mut(static_cast<int>(i)).begin());
    }
    return s;
  }

  int n() const { return n_; }
  int dim() const { return d_; }

  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }

  std::span<double> row_mut(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
  }

  const std::vector<double>& data() const { return data_; }

 private:
  int n_, d_;
  std::vector<double> data_;
};

inline Sample simulate(const DensityModel& density, int n, Rng& rng) {
  Sample s(n, density.dim());
  for (int i = 0; i < n; ++i) density.sample_point(rng, s.row_mut(i));
  return s;
}

/// Sorted copy of a 1-d sample with prefix sums; interval counts and sums in
/// O(log n). The window-sweep studies lean on this.
class Sorted1d {
 public:
  explicit Sorted1d(const Sample& s) {
    if (s.dim() != 1) throw DimensionUnsupported("sorted view: dimension 1 only");
    x_.resize(s.n());
    for (int i = 0; i < s.n(); ++i) x_[i] = s.row(i)[0];
    std::sort(x_.begin(), x_.end());
    prefix_.resize(x_.size() + 1, 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) prefix_[i + 1] = prefix_[i] + x_[i];
  }

  long long size() const { return static_cast<long long>(x_.size()); }

  // #{ x in [a, b] }, closed interval.
  long long count(double a, double b) const {
    if (!(a <= b)) return 0;
    auto lo = std::lower_bound(x_.begin(), x_.end(), a);
    auto hi = std::upper_bound(x_.begin(), x_.end(), b);
    return hi - lo;
  }

  // Sum of sample points in [a, b].
  double sum(double a, double b) const {
    if (!(a <= b)) return 0.0;
    std::size_t lo = std::lower_bound(x_.begin(), x_.end(), a) - x_.begin();
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), b) - x_.begin();
    return prefix_[hi] - prefix_[lo];
  }

  std::pair<std::size_t, std::size_t> range(double a, double b) const {
    std::size_t lo = std::lower_bound(x_.begin(), x_.end(), a) - x_.begin();
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), b) - x_.begin();
    return {lo, hi};
  }

  double at(std::size_t i) const { return x_[i]; }

 private:
  std::vector<double> x_;
  std::vector<double> prefix_;
};

// ---- CSV ------------------------------------------------------------------
//
// Header x1,...,xd; one observation per line; values round-trip at 17
// significant digits.

inline Sample load_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open sample file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) head.push_back(cell);
  }
  int d = static_cast<int>(head.size());
  for (int k = 0; k < d; ++k)
    if (head[k] != "x" + std::to_string(k + 1))
      throw ParseError(path + ":1: header must be x1,...,xd");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric cell '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != d)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(d) +
                       " cells, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return Sample::from_rows(rows, d);
}

inline void save_sample(const Sample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write sample file: " + path);
  for (int k = 0; k < s.dim(); ++k) out << (k ? "," : "") << "x" << (k + 1);
  out << "\n";
  char buf[64];
  for (int i = 0; i < s.n(); ++i) {
    auto r = s.row(i);
    for (int k = 0; k < s.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[k]);
      out << (k ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace ulep
