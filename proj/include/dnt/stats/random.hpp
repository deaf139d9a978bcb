#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "dnt/stats/normal.hpp"

namespace dnt::stats {

/// SplitMix64 finalizer: a bijective 64-bit mix.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn purpose tags into 64-bit keys.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Keyed derivation of independent substream seeds from one master seed.
///
/// stream() is a pure function of (master, case, replicate, purpose). Each
/// component is folded in through a full SplitMix round so neighbouring
/// indices land far apart.
class SeedScheme {
public:
    constexpr explicit SeedScheme(std::uint64_t master_seed) noexcept : master_(master_seed) {}

    constexpr std::uint64_t master_seed() const noexcept { return master_; }

    constexpr std::uint64_t stream(std::uint64_t case_id, std::uint64_t replicate,
                                   std::uint64_t purpose) const noexcept
    {
        std::uint64_t h = splitmix64(master_);
        h = splitmix64(h ^ splitmix64(case_id + 0x51ed270b27a4e3c5ULL));
        h = splitmix64(h ^ splitmix64(replicate ^ 0x2545f4914f6cdd1dULL));
        h = splitmix64(h ^ purpose);
        return h;
    }

    constexpr std::uint64_t stream(std::uint64_t case_id, std::uint64_t replicate,
                                   std::string_view purpose) const noexcept
    {
        return stream(case_id, replicate, fnv1a(purpose));
    }

private:
    std::uint64_t master_;
};

/// Portable variate generator.
///
/// The engine's output is fixed by the standard; every transform to a
/// continuous law is written here so the same seed produces the same draws
/// with any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_quantile(uniform()); }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
    double gamma(double shape)
    {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) {
                return d * v;
            }
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace dnt::stats
