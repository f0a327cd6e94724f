#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace realism {

// splitmix64 finalizer; used to derive independent seeds and as a
// counter-based generator for reproducible dataset synthesis.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

template <typename... Rest>
std::uint64_t mix64(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix64(mix64(a, b), static_cast<std::uint64_t>(rest)...);
}

// Maps a 64-bit word to a double in [0, 1).
inline double to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Stateless counter stream: draw k = 0, 1, 2, ... from a fixed key.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  double next_unit() { return to_unit_double(mix64(key_, counter_++)); }

  // Knuth's product-of-uniforms method; fine for the modest rates used here.
  int next_poisson(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_unit();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Seeded engine wrapper. Gaussian draws use Box-Muller without a cached
// spare so the full generator state is the engine state alone; that keeps
// snapshot/restore of simulation state exact.
class Rng {
 public:
  Rng() : engine_(0x853c49e6748fea9bULL) {}
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return to_unit_double(engine_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for the small n used here,
    // but use Lemire's trick anyway since it is one multiply.
    __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  double gaussian() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  static Rng deserialize(const std::string& text) {
    Rng r;
    std::istringstream is(text);
    is >> r.engine_;
    return r;
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace realism
