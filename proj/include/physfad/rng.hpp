#pragma once

// Deterministic counter-based random streams. Every realization / placement /
// configuration draws from its own substream derived from (seed, indices), so
// results are identical whether work items run serially or in parallel.

#include <cstdint>
#include <cmath>

#include "physfad/common.hpp"

namespace physfad::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    // Independent substream for work item `index`.
    Stream substream(std::uint64_t index) const {
        return Stream(mix(state_, index));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bit() { return (next_u64() >> 63) != 0; }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace physfad::rng
