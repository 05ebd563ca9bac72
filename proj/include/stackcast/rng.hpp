#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace stackcast {

/// Deterministic PRNG (xoshiro256++ seeded via splitmix64). The standard
/// library engines are portable but its distributions are not; every draw
/// here is pinned bit-for-bit so models reproduce across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept
    {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
        cached_normal_valid_ = false;
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, n) without modulo bias (rejection sampling).
    std::uint64_t uniform_below(std::uint64_t n) noexcept
    {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() noexcept
    {
        if (cached_normal_valid_) {
            cached_normal_valid_ = false;
            return cached_normal_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(theta);
        cached_normal_valid_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) noexcept
    {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// k distinct indices from [0, n), in random order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k)
    {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Stable per-task seed derivation: one master seed fans out into
    /// independent streams keyed by (stage, index).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept
    {
        std::uint64_t x = seed ^ (0x632be59bd9b4e019ULL * (stream + 1));
        splitmix64(x);
        x ^= 0x9e3779b97f4a7c15ULL * (index + 1);
        std::uint64_t y = x;
        return splitmix64(y);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) noexcept
    {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double cached_normal_ = 0.0;
    bool cached_normal_valid_ = false;
};

} // namespace stackcast
