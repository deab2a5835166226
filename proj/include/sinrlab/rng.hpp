#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sinrlab {

// Counter-based seed derivation: every random stream in the project is keyed
// by (seed_root, stream label, cell index, trial index) through a SplitMix64
// mix, so trials can be evaluated in any order or in parallel and still
// reproduce bit-identically.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view s) {
  // FNV-1a, folded through splitmix for avalanche.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t seed_root, std::string_view stream,
                                 std::uint64_t cell = 0, std::uint64_t trial = 0) {
  std::uint64_t h = splitmix64(seed_root ^ hash_label(stream));
  h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (cell + 1)));
  h = splitmix64(h ^ (0xc2b2ae3d27d4eb4fULL * (trial + 1)));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1) with 53 random bits; portable across platforms.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate) {
    // Inverse CDF; 1-u avoids log(0).
    return -std::log1p(-uniform()) / rate;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Exact Poisson sampling by multiplication for small means and recursive
  // splitting for large ones (Poisson(m) = Poisson(m/2) + Poisson(m/2)).
  // Avoids std::poisson_distribution to keep streams platform-stable.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) return poisson(mean / 2) + poisson(mean / 2);
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sinrlab
