#pragma once

#include <cstdint>
#include <limits>

namespace ullreg {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t v) noexcept {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

/// Named roles for independent streams within one replication.
enum class StreamRole : std::uint64_t {
  design = 1,
  noise = 2,
  split = 3,
  folds_full = 4,
  folds_train = 5,
  trajectory = 6,
  misc = 7,
};

/// Stream key for (base seed, replication, role).
constexpr std::uint64_t derive(std::uint64_t base_seed, std::uint64_t replication,
                               StreamRole role) noexcept {
  return mix64(mix64(mix64(base_seed) ^ replication) ^
               static_cast<std::uint64_t>(role));
}

/// Counter-based generator: the k-th output is mix64(key + k * gamma).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + (++counter_) * 0xd1b54a32d192ed03ULL);
  }

  /// Uniform double in [0,1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ullreg
