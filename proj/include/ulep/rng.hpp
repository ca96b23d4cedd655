#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ulep/common.hpp"

namespace ulep {

// splitmix64 finalizer; used to turn (master seed, stream indices) into
// well-separated engine seeds so replication streams are independent of
// scheduling order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = mix64(master ^ 0x6a09e667f3bcc908ULL);
  s = mix64(s ^ (a * 0xd6e8feb86659fd93ULL));
  s = mix64(s ^ (b * 0xa5cb9243f0aee8e5ULL));
  return s;
}

// Seeded generator. The engine sequence is pinned by the standard; the
// distribution transforms below are written out so draws do not depend on
// library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; one fresh pair per call, first component returned.
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Exact Poisson draw via exponential-product counting, chunked so the
  // running product never underflows for large means.
  long long poisson(double lambda) {
    if (!(lambda >= 0.0)) throw Error("poisson: negative mean");
    long long total = 0;
    while (lambda > 0.0) {
      double chunk = std::min(lambda, 400.0);
      lambda -= chunk;
      double limit = std::exp(-chunk);
      double prod = uniform();
      long long k = 0;
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      total += k;
    }
    return total;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ulep
