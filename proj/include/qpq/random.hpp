#pragma once

#include <cstdint>
#include <random>

namespace qpq {

// Seeded, platform-independent random source. Only the raw 64-bit engine
// output is used; the conversions below are defined here rather than through
// std distributions, whose algorithms are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer over (base, tag); used to derive independent child
// seeds for restarts, query selection and Monte Carlo workers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace qpq
