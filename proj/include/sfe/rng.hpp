#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>

namespace sfe {

// Splittable counter-seeded generator (xoshiro256++ state, splitmix64 stream
// derivation). Every replicate / atom / coordinate gets its own stream keyed
// by (master seed, tags...), so results are reproducible bit-for-bit and
// independent of thread count or truncation level.
class RngStream {
 public:
  static RngStream seeded(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tags = {}) {
    std::uint64_t key = mix(0x9e3779b97f4a7c15ull, master);
    for (std::uint64_t t : tags) key = mix(key, t);
    return RngStream(key);
  }

  // Independent substream; deterministic in (this stream's key, tag).
  RngStream child(std::uint64_t tag) const { return RngStream(mix(key_, tag)); }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform01()); }

  int rademacher() { return (next_u64() >> 63) ? 1 : -1; }

  std::uint64_t key() const { return key_; }

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {
    std::uint64_t x = key;
    for (auto& s : s_) s = splitmix(x);
    // avoid the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
  }

  static std::uint64_t splitmix(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    return splitmix(x);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t key_;
  std::uint64_t s_[4];
};

}  // namespace sfe
