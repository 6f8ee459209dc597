/*
   Copyright 2026 The ews authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ews/errors.hpp"

namespace ews {

// All randomness in this library flows through RngStream so that results are
// bit-reproducible across platforms and independent of the standard library's
// unspecified distribution algorithms.
//
// Pinned algorithms:
//   - engine:     xoshiro256++ 1.0 (Blackman & Vigna), seeded via SplitMix64
//   - uniforms:   53-bit mantissa scaling, u = (x >> 11) * 2^-53, u in [0, 1)
//   - normals:    Box-Muller transform with one cached spare
//   - triangular: inverse CDF
//   - substreams: SplitMix64 finalizer over (master seed, stream index)

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic 64-bit random stream (xoshiro256++).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    /// Uniform draw in [0, 1). Never returns 1.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal draw (Box-Muller, cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();  // log(0) guard
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seed for the index-th independent substream of a master seed.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t a = master;
    const std::uint64_t h = detail::splitmix64_next(a);
    std::uint64_t b = h ^ (index + 0x9E3779B97F4A7C15ULL);
    return detail::splitmix64_next(b);
}

inline RngStream substream(std::uint64_t master, std::uint64_t index) {
    return RngStream(substream_seed(master, index));
}

/// Triangular(lo, mode, hi) draw via inverse CDF.
inline double sample_triangular(RngStream& stream, double lo, double mode, double hi) {
    require(lo <= mode && mode <= hi && lo < hi,
            "sample_triangular: need lo <= mode <= hi and lo < hi");
    const double u = stream.uniform();
    const double cut = (mode - lo) / (hi - lo);
    if (u <= cut) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
    return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
}

/// n Wiener increments for step dt: independent N(0, sqrt(dt)) draws.
inline std::vector<double> wiener_increments(RngStream& stream, std::size_t n, double dt) {
    require(n >= 1, "wiener_increments: n must be >= 1");
    require(dt > 0.0, "wiener_increments: dt must be positive");
    const double scale = std::sqrt(dt);
    std::vector<double> out(n);
    for (auto& w : out) w = scale * stream.normal();
    return out;
}

}  // namespace ews
