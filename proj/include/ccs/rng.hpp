#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ccs {

// splitmix64 finalizer. Used to fold tags into substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a substream seed from a master seed and a sequence of tags:
//   s_0 = seed,  s_{k+1} = mix64(s_k ^ mix64(tag_k)).
// Every random draw in the library comes from a SeededRng whose seed was
// produced this way, which keeps trials independent of execution order.
constexpr std::uint64_t seed_chain(std::uint64_t seed) { return seed; }
template <typename... Rest>
constexpr std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t tag, Rest... rest) {
  return seed_chain(mix64(seed ^ mix64(tag)), rest...);
}

// Deterministic random stream. Wraps mt19937_64 but owns every conversion
// to doubles/integers so that outputs do not depend on the standard
// library's distribution implementations:
//   coin()          -> top bit of the next 64-bit draw
//   uniform01()     -> (draw >> 11) * 2^-53, in [0,1)
//   below(n)        -> masked rejection sampling, uniform on [0,n)
//   normal_pair()   -> Box-Muller on (1-uniform01(), uniform01())
//   cnormal()       -> circularly-symmetric complex N(0,1), i.e. each
//                      component N(0, 1/2)
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  int coin() { return static_cast<int>(next_u64() >> 63); }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("SeededRng::below: n must be positive");
    std::uint64_t mask = n - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < n) return v;
    }
  }

  std::pair<double, double> normal_pair() {
    double u1 = 1.0 - uniform01();  // (0,1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  std::complex<double> cnormal() {
    auto [a, b] = normal_pair();
    return {a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ccs
