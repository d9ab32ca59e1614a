// Seedable, portable generator for the deterministic simulations.
// splitmix64 (Steele/Lea/Flood via Vigna's public-domain reference):
// identical output for a given seed on every platform, so runs are
// reproducible across implementations of the same algorithm. The
// algorithm identifier is recorded in simulation reports.

#pragma once

#include <cstdint>
#include <span>

namespace qox {

class Rng {
public:
    static constexpr const char* algorithm = "splitmix64";

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

    // Samples an index from a discrete distribution. Entries must be
    // non-negative; an index with probability zero is never returned.
    std::size_t sample(std::span<const double> probabilities) {
        double u = next_unit();
        double acc = 0.0;
        std::size_t last_positive = 0;
        bool seen_positive = false;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            if (probabilities[i] > 0.0) {
                last_positive = i;
                seen_positive = true;
            }
            acc += probabilities[i];
            if (u < acc && probabilities[i] > 0.0) return i;
        }
        // Rounding left acc slightly below 1: fall back to the last
        // index that carries mass.
        return seen_positive ? last_positive : 0;
    }

private:
    std::uint64_t state_;
};

}  // namespace qox
