#pragma once

#include <cstdint>

namespace treemass {

// Deterministic stream of pseudo-random numbers, addressed by (seed, stream id).
// Equal addresses give bit-identical sequences; distinct stream ids give
// independent sequences by construction (PCG64, one increment per stream).
//
// child() derives a new address from the parent's address and a (tag, index)
// pair. Derivation uses the address only, never the consumption state, so a
// kernel may derive per-element streams in any order, or in parallel, and the
// produced numbers do not change.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {
    const u128 mult = mult128();
    inc_ = (static_cast<u128>(mix64(stream_id ^ 0xda3e39cb94b95bdbULL)) << 64 |
            mix64(stream_id + 0x9e3779b97f4a7c15ULL));
    inc_ = (inc_ << 1) | 1u;
    state_ = 0;
    state_ = state_ * mult + inc_;
    state_ += (static_cast<u128>(mix64(seed ^ 0x853c49e6748fea9bULL)) << 64) |
              mix64(seed + 0x6a09e667f3bcc909ULL);
    state_ = state_ * mult + inc_;
  }

  std::uint64_t next_u64() {
    state_ = state_ * mult128() + inc_;
    const std::uint64_t xored =
        static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((64u - rot) & 63u));
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1), strictly interior; safe under log().
  double next_open_double() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Independent stream addressed by this stream's identity and (tag, index).
  RngStream child(std::uint64_t tag, std::uint64_t index = 0) const {
    std::uint64_t id = mix64(stream_ + 0x9e3779b97f4a7c15ULL * (tag + 1));
    id = mix64(id ^ (index + 0xbf58476d1ce4e5b9ULL));
    return RngStream(seed_, id);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  using u128 = unsigned __int128;

  static constexpr u128 mult128() {
    return (static_cast<u128>(0x2360ed051fc65da4ULL) << 64) | 0x4385df649fccf645ULL;
  }

  // SplitMix64 finalizer; full avalanche, used for address derivation only.
  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  u128 state_;
  u128 inc_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace treemass
