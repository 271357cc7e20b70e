#pragma once

#include "ntt/precision.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace ntt {

// Deterministic random source. All randomness in the project flows from one
// master seed; independent purposes get their own stream through
// derive_seed(seed, purpose), which mixes an FNV-1a hash of the purpose
// string into the seed with a splitmix64 finalizer. Draw order is part of
// every caller's contract: identical seeds give identical bit streams on
// every run of the same build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  real uniform01() {
    return static_cast<real>((next_u64() >> 11) * (1.0 / 9007199254740992.0));
  }

  real uniform(real lo, real hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller with a cached spare, independent of std::normal_distribution
  // so the stream is stable across standard library implementations.
  real normal(real mu, real sigma);

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  real spare_ = 0;
};

}  // namespace ntt
