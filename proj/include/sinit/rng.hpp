#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace sinit {

/// SplitMix64 finalizer. Used for seeding and for deriving child streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a; stable label hashing for derive_child.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// The stream is a pure function of the seed: no platform-dependent state,
/// no std:: distributions. Normal variates come from Box–Muller with both
/// outputs consumed (the second is cached), so two generators with equal
/// seeds produce equal streams whatever else happens in the process.
///
/// Not thread-safe. Give each thread its own instance via derive_child.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_open_low() noexcept;
  /// Standard normal.
  double normal() noexcept;
  /// Uniform integer in [0, bound); bound > 0. Lemire's rejection method.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Independent generator for a labelled sub-task of this one.
  [[nodiscard]] Rng child(std::uint64_t label) const noexcept;
  [[nodiscard]] Rng child(std::string_view label) const noexcept { return child(fnv1a(label)); }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Seed of the sub-stream `label` of `seed`. Pure and order-independent.
std::uint64_t derive_child(std::uint64_t seed, std::uint64_t label) noexcept;
std::uint64_t derive_child(std::uint64_t seed, std::string_view label) noexcept;

}  // namespace sinit
