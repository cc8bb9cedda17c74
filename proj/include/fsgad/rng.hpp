#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fsgad::rng {

// Counter-derived random streams. Every consumer derives its own stream from
// (seed, purpose, ...) so parallel and serial execution see identical draws,
// and results are bit-identical across platforms (std:: distributions are not).

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound). Rejection-free modulo bias is negligible
    // for desk-scale bounds, but use Lemire rejection anyway for exactness.
    std::uint64_t uniform_int(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller (deterministic, no state cached between
    // calls: both uniforms are drawn fresh and the second value is discarded).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Derive an independent stream from a seed and up to three context ids
// (e.g. epoch, target node, view). Chained avalanche mixing keeps distinct
// tuples statistically uncorrelated.
inline Stream derive(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                     std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t s = mix64(seed ^ kGolden);
    s = mix64(s ^ (a + kGolden));
    s = mix64(s ^ (b + kGolden));
    s = mix64(s ^ (c + kGolden));
    s = mix64(s ^ (d + kGolden));
    return Stream(s);
}

// Purpose tags keep unrelated consumers on disjoint streams.
enum Purpose : std::uint64_t {
    kInit = 1,
    kShuffle = 2,
    kTrainView = 3,
    kScoreView = 4,
    kInject = 5,
    kSplit = 6,
    kScoreNegatives = 7,
};

}  // namespace fsgad::rng
