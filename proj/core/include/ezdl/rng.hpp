#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ezdl {

/**
 * Counter-based generator "ezdl-splitmix64/v1".
 *
 * Output k (k = 1, 2, ...) is mix64(seed + k * 0x9E3779B97F4A7C15) where mix64
 * is the SplitMix64 finalizer. The stream is a pure function of (seed, k), so
 * seeds give the same numbers on every platform and in any language that
 * implements these few lines. Derived draws:
 *
 *  - uniform():     (next() >> 11) * 2^-53, in [0, 1)
 *  - index(n):      Lemire multiply-shift with rejection, uniform in [0, n)
 *  - normal():      Box-Muller on two uniforms, no cached spare
 *
 * Changing any of the above is a format break and must bump the version tag.
 */
class Rng {
public:
    static constexpr const char* kName = "ezdl-splitmix64/v1";

    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next() noexcept
    {
        ++counter_;
        std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) noexcept
    {
        __uint128_t m = static_cast<__uint128_t>(next()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double normal() noexcept
    {
        // 1 - u keeps the log argument in (0, 1].
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace ezdl
