#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

// Deterministic randomness helpers. Everything here is reproducible
// bit-for-bit across standard library implementations; std::*_distribution
// is not, so sampling is hand-rolled on top of std::mt19937_64.
namespace bitcurve::rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t combine(std::uint64_t seed, std::initializer_list<std::uint64_t> values) {
  for (auto v : values) seed = combine(seed, v);
  return seed;
}

inline std::uint64_t hash_double(double v) { return std::bit_cast<std::uint64_t>(v); }

inline std::uint64_t hash_doubles(const std::vector<double>& values) {
  std::uint64_t h = 0x51ed2701a3c10c01ULL;
  for (double v : values) h = combine(h, hash_double(v));
  return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double canonical(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * canonical(gen);
}

// Standard normal via Box-Muller; one fresh pair per call pair.
class Normal {
 public:
  double operator()(std::mt19937_64& gen) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = canonical(gen);
    } while (u1 <= 0.0);
    const double u2 = canonical(gen);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bitcurve::rng
