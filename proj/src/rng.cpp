#include "decon/rng.hpp"

#include <cmath>

namespace decon::rng {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t* hi) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    *hi = static_cast<std::uint64_t>(p >> 64);
    return static_cast<std::uint64_t>(p);
}

inline std::array<std::uint64_t, 4> round_once(const std::array<std::uint64_t, 4>& ctr,
                                               const std::array<std::uint64_t, 2>& key) {
    std::uint64_t hi0, hi1;
    const std::uint64_t lo0 = mulhilo(kPhiloxM0, ctr[0], &hi0);
    const std::uint64_t lo1 = mulhilo(kPhiloxM1, ctr[2], &hi1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key) {
    std::array<std::uint64_t, 4> ctr = counter;
    std::array<std::uint64_t, 2> k = key;
    ctr = round_once(ctr, k);
    for (int r = 1; r < 10; ++r) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
        ctr = round_once(ctr, k);
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_value) {
    return mix64(mix64(seed) ^ mix64(tag_value + 0x632BE59BD9B4E019ULL));
}

std::uint64_t tag(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_tag) {
    key_[0] = derive_seed(seed, stream_tag);
    key_[1] = mix64(key_[0]);
}

void Stream::refill() {
    buf_ = philox4x64(counter_, key_);
    buf_pos_ = 0;
    for (int w = 0; w < 4; ++w) {
        if (++counter_[w] != 0) break;
    }
}

std::uint64_t Stream::next_u64() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
}

double Stream::next_unit() {
    // 53 high bits, offset by half a ulp so the value is strictly inside (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

double Stream::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_unit() - 1.0;
        v = 2.0 * next_unit() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    has_spare_ = true;
    return u * f;
}

}  // namespace decon::rng
