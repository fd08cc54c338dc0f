#pragma once

#include <cstdint>

namespace nsmc {

/// Splittable, counter-based random stream. A stream is a pure value: the
/// output sequence is a function of (seed, derivation path) only, so streams
/// can be copied, moved across threads and re-derived at will. Substreams
/// obtained through child() are statistically independent of the parent and
/// of each other; there is no sequential coupling between siblings.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(seed ^ kRootSalt)) {}

  /// Derive the substream for path element `index`. Equal (seed, path)
  /// always yields the identical stream.
  RandomStream child(std::uint64_t index) const {
    return RandomStream(mix(mix(key_ ^ (index + kChildSalt)) + kChildSalt2), 0);
  }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

  /// Uniform variate strictly inside (0,1): never returns an endpoint.
  double u01() {
    const std::uint64_t bits = next_u64() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by inverse CDF; consumes exactly one uniform.
  double normal();

 private:
  RandomStream(std::uint64_t key, int) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kRootSalt = 0xD1B54A32D192ED03ULL;
  static constexpr std::uint64_t kChildSalt = 0x8CB92BA72F3D8DD7ULL;
  static constexpr std::uint64_t kChildSalt2 = 0xEB44ACCAB455D165ULL;

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace nsmc
