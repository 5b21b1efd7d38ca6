#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kgcoop {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation-defined, so uniform/normal are computed
// from raw engine bits here to keep runs bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  // Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Seed for a named component derived from the global run seed:
// splitmix64(global ^ fnv1a64(component)).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component);

}  // namespace kgcoop
