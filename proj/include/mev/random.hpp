#pragma once

#include <cstdint>
#include <random>

namespace mev {

// Splittable uniform stream. Every stream is identified by a 64-bit key;
// substream(i) derives a statistically independent child key, so work units
// indexed by i draw the same numbers no matter which thread runs them.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(seed)), engine_(make_engine(key_)) {}

  [[nodiscard]] RandomStream substream(std::uint64_t index) const {
    return RandomStream(Key{mix(key_ ^ mix(index + 0x9e3779b97f4a7c15ULL))});
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer on [lo, hi], via rejection so the result is portable.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit RandomStream(Key k) : key_(k.value), engine_(make_engine(key_)) {}

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::mt19937_64 make_engine(std::uint64_t key) {
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(mix(key)), static_cast<std::uint32_t>(mix(key) >> 32)};
    return std::mt19937_64(seq);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace mev
