#pragma once

#include <cstdint>

namespace sadic {

/**
 * SplitMix64: the documented PRNG of every seeded run.
 *
 * Chosen because it is tiny, platform-stable (pure 64-bit integer ops, no
 * implementation-defined distribution code), and splittable: split(i) derives
 * an independent stream per work item, so results never depend on how items
 * were scheduled across workers.
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Independent child stream for work item `index`; deterministic.
    [[nodiscard]] SplitMix64 split(std::uint64_t index) const noexcept {
        SplitMix64 mixer(state_ ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL));
        std::uint64_t s = mixer.next();
        return SplitMix64(s);
    }

    /// Uniform double in [0, 1) with 53 random bits; bit-stable across platforms.
    double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound) by rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = bound * ((~0ULL) / bound);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) noexcept {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    [[nodiscard]] std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace sadic
