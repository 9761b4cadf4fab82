#pragma once

#include <cstdint>

namespace bifeedback {

// SplitMix64 (Steele, Lea, Flood 2014). The whole generator state is the
// single 64-bit word, so copying a SplitMix64 forks an identical stream.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling removes modulo bias.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  constexpr std::uint64_t state() const { return state_; }

  friend constexpr bool operator==(const SplitMix64&, const SplitMix64&) = default;

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a parent seed and a label.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
  SplitMix64 mix(parent ^ (label * 0xD1B54A32D192ED03ULL));
  mix.next();
  return mix.next();
}

}  // namespace bifeedback
