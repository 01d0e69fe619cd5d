#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace semlink {

using Rng = std::mt19937_64;

// splitmix64 finalizer; good avalanche for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t id) noexcept {
    return mix64(mix64(base) ^ (id + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(base, a), b);
}

/// Uniform integer in [0, n). Implemented directly instead of through
/// std::uniform_int_distribution so streams are identical across standard
/// libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // rejection sampling keeps it unbiased
    const std::uint64_t limit = Rng::max() - Rng::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (pairs cached). Portable across standard
/// libraries, unlike std::normal_distribution.
class Gaussian {
public:
    double operator()(Rng& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01(rng);
        } while (u1 <= 0.0);
        const double u2 = uniform01(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace semlink
