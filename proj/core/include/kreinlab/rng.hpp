#pragma once

// Counter-based random streams.  Philox4x32-10 keyed by (seed, stream) with
// the replication index in the high half of the counter, so stream i of an
// experiment is the same sequence no matter which thread draws it.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

namespace kreinlab {

class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() = default;
  Philox4x32(Key key, std::uint64_t substream) : key_(key) {
    counter_[2] = static_cast<std::uint32_t>(substream);
    counter_[3] = static_cast<std::uint32_t>(substream >> 32);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      buffer_ = bijection(counter_, key_);
      increment();
      index_ = 0;
    }
    return buffer_[index_++];
  }

  /// The raw 10-round Philox bijection.
  static constexpr Block bijection(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;

  void increment() {
    if (++counter_[0] == 0) ++counter_[1];
  }

  Key key_{};
  Block counter_{};
  Block buffer_{};
  int index_ = 4;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// A random stream with the handful of variates the samplers need.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
      : engine_(make_key(seed, stream), substream) {}

  /// Stream for replication `index` of experiment `name` under `seed`.
  static Rng for_replication(std::uint64_t seed, std::string_view name,
                             std::uint64_t index) {
    return Rng(seed, fnv1a64(name), index);
  }

  Philox4x32& engine() { return engine_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = engine_();
    const std::uint64_t lo = engine_();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() { return normal_(engine_); }

  double exponential() { return -std::log(uniform_pos()); }

  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

 private:
  static Philox4x32::Key make_key(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(stream));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  Philox4x32 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace kreinlab
