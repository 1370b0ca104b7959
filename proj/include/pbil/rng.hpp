#pragma once

#include <array>
#include <cstdint>

namespace pbil {

// SplitMix64 finalizer. Used for seeding and for deriving per-trial seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept
{
    std::uint64_t s = base;
    std::uint64_t h = splitmix64(s);
    s = h ^ a;
    h = splitmix64(s);
    s = h ^ b;
    return splitmix64(s);
}

/// xoshiro256** with SplitMix64 seeding. Output is identical on every
/// platform, which the replay guarantees of the runner depend on.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            w = splitmix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }

    result_type next() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        __uint128_t m = static_cast<__uint128_t>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Child stream seeded from this one; the parent advances by one draw.
    Rng split() noexcept { return Rng(next() ^ 0x6a09e667f3bcc909ULL); }

    bool operator==(const Rng&) const = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace pbil
