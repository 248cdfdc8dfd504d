#pragma once

// Counter-based random streams.
//
// A stream is addressed by (seed, replicate, name). The name and seed select a
// Philox4x32-10 key; the replicate occupies the upper half of the 128-bit
// counter, the lower half counts blocks within the stream. Streams with the
// same triple therefore produce identical words no matter which thread or in
// which order they are consumed.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace mtlab {

namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Counter round(const Counter& ctr, const Key& key) noexcept
{
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

/// Philox4x32 with 10 rounds (the Random123 default).
constexpr Counter philox4x32_10(Counter ctr, Key key) noexcept
{
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        ctr = round(ctr, key);
    }
    return ctr;
}

} // namespace philox

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001B3ull;
    }
    return h;
}

struct RngStreamSpec {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::string name;
};

class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t replicate, std::string_view name) noexcept
    {
        const std::uint64_t k = splitmix64(seed ^ splitmix64(fnv1a64(name)));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        replicate_ = replicate;
    }

    explicit Stream(const RngStreamSpec& spec) noexcept : Stream(spec.seed, spec.replicate, spec.name) {}

    std::uint32_t next_u32() noexcept
    {
        if (used_ == 4) {
            refill();
        }
        return buffer_[used_++];
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection,
    /// so the result is exactly uniform.
    std::uint32_t uniform_below(std::uint32_t bound)
    {
        if (bound == 0) {
            throw parameter_error("uniform_below: bound must be positive");
        }
        std::uint64_t m = std::uint64_t{next_u32()} * bound;
        auto low = static_cast<std::uint32_t>(m);
        if (low < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (low < threshold) {
                m = std::uint64_t{next_u32()} * bound;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    /// 1 with probability p. p = 0 and p = 1 are exact.
    bool bernoulli(double p) noexcept { return next_double() < p; }

    std::uint64_t blocks_consumed() const noexcept { return block_; }

  private:
    void refill() noexcept
    {
        const philox::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(replicate_),
                                  static_cast<std::uint32_t>(replicate_ >> 32)};
        buffer_ = philox::philox4x32_10(ctr, key_);
        ++block_;
        used_ = 0;
    }

    philox::Key key_{};
    std::uint64_t replicate_ = 0;
    std::uint64_t block_ = 0;
    philox::Counter buffer_{};
    int used_ = 4;
};

} // namespace mtlab
