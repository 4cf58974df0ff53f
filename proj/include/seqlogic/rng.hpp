#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace seqlogic {

/// splitmix64 finalizer; used to spread raw seeds before feeding mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the i-th independent stream of a base seed. Streams are splittable
/// by construction: stream i depends only on (base, i), never on how many
/// draws other streams made, so shots may run in any order or in parallel.
inline std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// mt19937_64 wrapped with platform-independent uniform doubles (53-bit
/// mantissa draw, no std::uniform_real_distribution).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t bits() { return engine_(); }

  /// Index drawn from an unnormalized weight vector; weights below `prune`
  /// are never selected.
  int pick(const std::vector<double>& weights, double prune = 0.0) {
    double total = 0.0;
    for (double w : weights) total += w > prune ? w : 0.0;
    double u = uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= prune) continue;
      last = static_cast<int>(i);
      u -= weights[i];
      if (u < 0.0) return last;
    }
    return last;  // numerical tail lands on the final selectable index
  }

  /// Standard normal via Box-Muller on the canonical uniforms.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(6.283185307179586476925286766559 * u2);
    have_spare_ = true;
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace seqlogic
