#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ldp {

/// Counter-based stream RNG. Each (seed, stream) pair names an independent
/// sequence; `fork` derives child streams from integer tags, so a simulation
/// can key one stream per (path, cell) and produce identical output no matter
/// how work is scheduled across threads. Output words come from the SplitMix64
/// finalizer applied to key + counter.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed + kSeedSalt) ^ mix(stream + kStreamSalt))) {}

  /// Child stream for a tagged substream (counter starts at zero).
  [[nodiscard]] StreamRng fork(std::uint64_t tag) const {
    return StreamRng(Key{mix(key_ ^ mix(tag + kForkSalt))});
  }
  [[nodiscard]] StreamRng fork(std::uint64_t tag_a, std::uint64_t tag_b) const {
    return fork(tag_a).fork(tag_b);
  }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform draw in the open interval (0, 1); safe to feed into log().
  double uniform01() {
    const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  /// Uniform draw in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) { return (*this)() % n; }

  /// Standard normal via Box-Muller (platform-independent sequence).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit StreamRng(Key k) : key_(k.value) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x8e2f1603a4d3b7c9ULL;
  static constexpr std::uint64_t kStreamSalt = 0x5851f42d4c957f2dULL;
  static constexpr std::uint64_t kForkSalt = 0xd1342543de82ef95ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ldp
