#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pushgne {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives the k-th child seed of `parent`. Used to expand a master seed
/// into per-run seeds and a run seed into independent streams.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t k) noexcept {
  return mix64(mix64(parent) ^ mix64(k + 0x5851f42d4c957f2dULL));
}

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, player, time, index). Nothing is stateful, so any draw can
/// be replayed after the fact and parallel consumers never interfere.
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t player,
                               std::uint64_t time,
                               std::uint64_t index) const noexcept {
    std::uint64_t h = mix64(seed_ ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ stream);
    h = mix64(h ^ player);
    h = mix64(h ^ time);
    return mix64(h ^ index);
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  constexpr double uniform01(std::uint64_t stream, std::uint64_t player,
                             std::uint64_t time,
                             std::uint64_t index) const noexcept {
    return static_cast<double>(bits(stream, player, time, index) >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi, std::uint64_t stream,
                           std::uint64_t player, std::uint64_t time,
                           std::uint64_t index) const noexcept {
    return lo + (hi - lo) * uniform01(stream, player, time, index);
  }

  /// Standard normal via Box-Muller on two counter slots (2*index, 2*index+1).
  double normal(std::uint64_t stream, std::uint64_t player, std::uint64_t time,
                std::uint64_t index) const noexcept {
    const double u1 = 1.0 - uniform01(stream, player, time, 2 * index);
    const double u2 = uniform01(stream, player, time, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

/// Stream tags used by the built-in scenarios and the engine.
namespace streams {
inline constexpr std::uint64_t kCoefficients = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kGraph = 3;
}  // namespace streams

}  // namespace pushgne
