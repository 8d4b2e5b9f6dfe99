#include "rawbfst/random.hpp"

#include "rawbfst/numkernel.hpp"

namespace rawbfst {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void PhiloxStream::refill() {
  std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                      stream_[0], stream_[1]};
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  block_ = ctr;
  ++counter_;
  pos_ = 0;
}

double PhiloxStream::normal() { return num::std_normal_quantile(uniform_open()); }

PhiloxStream make_stream(std::uint64_t master_seed, StreamNamespace ns, std::uint64_t tag_a, std::uint64_t tag_b,
                         std::uint64_t tag_c) {
  const std::uint64_t key = combine_keys(combine_keys(master_seed, static_cast<std::uint64_t>(ns)), tag_a);
  return PhiloxStream(key, combine_keys(tag_b, mix64(tag_c)));
}

std::uint64_t hash_index(std::span<const int> index) {
  std::uint64_t h = mix64(index.size());
  for (int v : index) h = combine_keys(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  return h;
}

}  // namespace rawbfst
