#pragma once

#include <cstdint>

namespace selfnorm {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so results do not depend on draw order or on
/// how work is split across threads. Mixing is SplitMix64's finalizer.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t counter) const;
  /// Uniform integer in [0, bound) by rejection-free multiply-shift on 64 bits.
  std::uint64_t below(std::uint64_t bound, std::uint64_t stream, std::uint64_t counter) const;
  /// Standard normal via Box-Muller on counters (2c, 2c + 1).
  double normal(std::uint64_t stream, std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Named stream identifiers.
enum RngStream : std::uint64_t {
  kStreamInitialWeights = 0x6574613000000001ULL,
  kStreamFeatures = 0x6665617400000002ULL,
  kStreamLabels = 0x6c61626c00000003ULL,
  kStreamHypercube = 0x6375626500000004ULL,
  kStreamTests = 0x7465737400000005ULL,
};

}  // namespace selfnorm
