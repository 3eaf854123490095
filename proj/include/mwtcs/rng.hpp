#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mwtcs {

// SplitMix64 finalizer. Full 64-bit avalanche: every input bit affects every
// output bit, so nearby (seed, k) pairs yield statistically independent streams.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seed-splitting rule: seed_k = splitmix64(seed XOR splitmix64(k)).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(seed ^ splitmix64(k));
}

// Disjoint seed namespaces for dataset streams (train/test separation).
inline constexpr std::uint64_t kTrainStream = 0x7261696e5f6e7331ull;
inline constexpr std::uint64_t kTestStream  = 0x746573745f6e7332ull;
static_assert(kTrainStream != kTestStream);

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t ns, std::uint64_t k) {
  return mix_seed(mix_seed(seed, ns), k);
}

// Deterministic uniform/normal draws on top of std::mt19937_64. The raw engine
// output is pinned by the standard; the mappings below avoid std distributions,
// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1ull;
    auto draw = static_cast<std::uint64_t>(uniform() * static_cast<double>(span));
    if (draw >= span) draw = span - 1;
    return lo + static_cast<std::int64_t>(draw);
  }

  // Box-Muller; consumes two uniforms per pair, caches the second value
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mwtcs
