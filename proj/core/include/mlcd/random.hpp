#pragma once

#include <cstdint>
#include <random>

namespace mlcd {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

// Seed for a named sub-stream of a base seed (e.g. per replication, per method).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// mt19937_64 with distribution helpers whose output does not depend on the
// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlcd
