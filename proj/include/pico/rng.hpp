#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace pico {

// Deterministic, platform-independent random number generator.
//
// The generator is splitmix64 (Steele et al., "Fast splittable pseudorandom
// number generators"). All randomness in the project flows from a single
// 64-bit seed through named sub-streams so that components (data generation,
// parameter init, shuffling) can be varied independently:
//
//   sub-stream  = splitmix of (seed ^ fnv1a64(name))
//   per-item    = splitmix of (seed + (index+1) * 0x9E3779B97F4A7C15)
//
// The per-item construction is random access, so per-demonstration streams
// are independent of generation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Named sub-stream of `seed`.
  static Rng stream(std::uint64_t seed, std::string_view name);
  // Index-derived sub-stream of `seed` (splitmix fan-out).
  static Rng derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double next_double();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (one value per pair, spare cached).
  double normal();
  double normal(double mean, double stddev);
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace pico
