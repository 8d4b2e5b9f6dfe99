#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace rawbfst {

/// SplitMix64 finalizer; used to derive stream keys from structured ids.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

/// Key namespaces keep production and oracle streams disjoint.
enum class StreamNamespace : std::uint64_t {
  kProduction = 0x5241574246535431ULL,
  kOracle = 0x4f5241434c453031ULL,
  kHarness = 0x4841524e45535331ULL,
};

/// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit
/// key and a 64-bit stream id; the remaining 64 counter bits index blocks.
/// Satisfies UniformRandomBitGenerator with 32-bit output.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  PhiloxStream(std::uint64_t key, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return (hi << 32) | lo;
  }

  /// Uniform on (0, 1] with 53 random bits.
  double uniform_open_closed() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }
  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  /// Standard normal by inversion of the normal cdf.
  double normal();

  std::uint64_t blocks_consumed() const { return counter_; }
  /// Jumps to block `block`; the next output is its first word.
  void seek(std::uint64_t block) {
    counter_ = block;
    pos_ = 4;
  }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
};

/// Structured stream id: (master seed, namespace, up to three integer tags).
PhiloxStream make_stream(std::uint64_t master_seed, StreamNamespace ns, std::uint64_t tag_a,
                         std::uint64_t tag_b = 0, std::uint64_t tag_c = 0);

/// Stream id for a multi-index key such as an integer cube index.
std::uint64_t hash_index(std::span<const int> index);

}  // namespace rawbfst
