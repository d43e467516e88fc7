#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace recourse {

/// Counter-based stream: the uniform for (seed, counter) is a pure function
/// of both, so any partition of draw indices into chunks yields the same
/// values. Mixing is the SplitMix64 finalizer.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

/// Unbiased integer in [0, bound) from successive counters starting at
/// `counter`, which is advanced past every value consumed.
inline std::uint64_t bounded(const CounterRng& rng, std::uint64_t& counter, std::uint64_t bound) noexcept {
  const std::uint64_t reject_below = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = rng.bits(counter++);
    if (x >= reject_below) return x % bound;
  }
}

/// Fisher-Yates shuffle driven by a CounterRng; identical on every platform.
template <typename T>
void deterministic_shuffle(std::span<T> items, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, counter, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace recourse
