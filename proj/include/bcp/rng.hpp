#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bcp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Thin wrapper over mt19937_64 whose derived quantities (uniforms, categorical
// draws) are computed here rather than through <random> distributions, so the
// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream for (root, index); used to give every episode its own
  // generator so serial and parallel collection agree.
  static Rng stream(std::uint64_t root, std::uint64_t index) {
    return Rng(splitmix64(root) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF draw. Zero-probability entries are never returned.
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      cum += probs[i];
      last_positive = static_cast<int>(i);
      if (u < cum) return last_positive;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bcp
