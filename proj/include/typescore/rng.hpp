#pragma once

#include <cstdint>

namespace typescore {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stateless generator: draw number `counter` of the stream identified by
// (seed, stream, substream) is a pure function of those four values, so
// streams never interfere and results do not depend on evaluation order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                       std::uint64_t substream = 0) noexcept
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ substream)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter));
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n > 0 (multiply-shift; bias is below 2^-64 * n).
  std::uint64_t below(std::uint64_t n, std::uint64_t counter) const noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits(counter)) * n) >> 64);
  }

 private:
  std::uint64_t key_;
};

}  // namespace typescore
