#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ergoflow {

// SplitMix64 finalizer; used to spread (master seed, stream index) pairs
// over the full 64-bit space before seeding the engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent stream per sample path.  Deriving the engine seed from
// (master, index) makes path i identical no matter which worker draws it or
// in which order an ensemble is scheduled.  Variates are generated from raw
// engine output rather than std:: distributions, whose algorithms are
// implementation-defined; results must be bit-stable across toolchains.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t index)
      : eng_(splitmix64(master + 0x9e3779b97f4a7c15ULL * (index + 1))) {}

  // uniform on the open interval (0,1); never hits an endpoint, so logs and
  // negative powers stay finite
  double u01() {
    const std::uint64_t bits = eng_() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1p-53;
  }

  // standard exponential
  double exponential() { return -std::log(u01()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ergoflow
