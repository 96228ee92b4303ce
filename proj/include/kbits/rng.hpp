#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace kbits {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** — fixed algorithm so that seeded streams are identical on
// every platform/compiler (std:: distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }
    // 128-bit seed (e.g. the public shuffle seed carried on the wire);
    // the high half is folded in first so every state word depends on all bits
    explicit Rng(const std::array<std::uint8_t, 16>& seed) {
        std::uint64_t lo = 0, hi = 0;
        for (int i = 0; i < 8; ++i) lo = (lo << 8) | seed[i];
        for (int i = 8; i < 16; ++i) hi = (hi << 8) | seed[i];
        std::uint64_t sm = lo ^ splitmix64(hi);
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // unbiased uniform integer in [0, bound) by rejection
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound < 2) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    // standard normal via Box–Muller (pairs cached)
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Samples a nonnegative integer displacement j in [0, max_j] with weights
// proportional to exp(-(j*step)^2 / (2 sigma^2)), by inverse CDF over a
// precomputed cumulative table.  Used for the grid-aligned cloaking noise.
class DiscreteGaussian {
public:
    DiscreteGaussian(double sigma, double step, std::uint32_t max_j) {
        cdf_.reserve(64);
        double acc = 0.0;
        for (std::uint32_t j = 0; j <= max_j; ++j) {
            const double x = static_cast<double>(j) * step;
            const double w = std::exp(-(x * x) / (2.0 * sigma * sigma));
            acc += w;
            cdf_.push_back(acc);
            if (w < acc * 1e-18) break;  // tail numerically irrelevant
        }
        total_ = acc;
    }

    std::uint32_t sample(Rng& rng) const {
        const double u = rng.next_double() * total_;
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return static_cast<std::uint32_t>(lo);
    }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

}  // namespace kbits
