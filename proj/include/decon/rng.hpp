#pragma once

// Counter-based random generator (Philox4x64, 10 rounds). Every stream is a
// pure function of (seed, tag): no global state, no warm-up, and independent
// streams can be derived for parallel work without coordination. Uniform and
// normal draws consume the stream sequentially, so a fixed (seed, tag) always
// yields the same sequence.

#include <array>
#include <cstdint>
#include <string_view>

namespace decon::rng {

// One Philox4x64-10 block: 256-bit counter, 128-bit key -> 4 x 64-bit output.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

// SplitMix64-style finalizer used for seed/tag mixing.
std::uint64_t mix64(std::uint64_t x);

// Derive a child seed from (seed, tag). Used for per-replication seeds and
// per-step sub-streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// FNV-1a hash of a label, for naming sub-streams ("params", "train", ...).
std::uint64_t tag(std::string_view label);

class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream_tag);

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1); 53-bit resolution, never returns
    // an endpoint (safe for log()).
    double next_unit();

    // Uniform on [lo, hi).
    double next_uniform(double lo, double hi);

    // Standard normal via the Marsaglia polar method (one spare cached).
    double next_normal();

  private:
    void refill();

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{};
    std::array<std::uint64_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace decon::rng
