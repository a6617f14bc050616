#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ravnet {

/// Deterministic 64-bit generator (splitmix64). The whole generator state is
/// a single u64, which is what the checkpoint format stores, and the output
/// sequence is identical on every platform. std::mt19937 would neither fit
/// the on-disk field nor guarantee cross-stdlib distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, bound). Modulo bias is negligible for the small
  /// bounds used here (shuffles, phantom geometry).
  std::uint64_t next_below(std::uint64_t bound) { return bound ? next_u64() % bound : 0; }

  /// Box-Muller draw. The spare value is discarded so the state stays a
  /// plain u64 between calls.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

}  // namespace ravnet
