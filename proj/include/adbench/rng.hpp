#pragma once

// Seeded pseudorandom generator used for every stochastic component: splits,
// bootstrap resamples, weight init, reparameterization noise. Deliberately
// NOT std::mt19937 + std distributions, whose outputs differ across standard
// library implementations. The generator below is fully specified here so
// partitions and draws are reproducible across platforms:
//   state init: splitmix64 over the user seed (Steele/Lea/Flood constants)
//   stream:     xoshiro256** (Blackman/Vigna, public domain reference code)
//   uniform01:  top 53 bits scaled by 2^-53
//   below(n):   Lemire multiply-shift with rejection (exact uniformity)
//   normal:     Box-Muller on two uniforms, second value cached
//   shuffle:    Fisher-Yates from the top index down

#include <cmath>
#include <cstdint>
#include <vector>

namespace adbench {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace detail

// Derives an independent stream seed from (seed, salt); used to give every
// cell / member / point its own documented stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (salt * 0x9E3779B97F4A7C15ULL);
    return detail::splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        std::uint64_t* s = state_;
        const std::uint64_t result = detail::rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = detail::rotl(s[3], 45);
        return result;
    }

    // [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n), n > 0
    std::uint64_t below(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = -n % n;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // standard normal, Box-Muller
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * next_normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // n indices drawn with replacement from [0, n) — bootstrap resample
    std::vector<std::size_t> bootstrap_indices(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = static_cast<std::size_t>(below(n));
        return idx;
    }

private:
    std::uint64_t state_[4];
    bool has_spare_;
    double spare_;
};

}  // namespace adbench
