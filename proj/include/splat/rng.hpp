// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace splat {

// Small counter-based generator (splitmix64). Chosen over <random> engines so
// that every stream is reproducible bit-for-bit from a u64 seed, and so that
// sub-streams can be derived per pipeline stage without coupling their
// consumption order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t uniform_index(std::size_t n) { return std::size_t(next_u64() % n); }

    // Box-Muller; consumes two uniforms per draw, no cached second value.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derives an independent sub-seed for a named stage, so stages of a run
    // can be replayed in isolation from the single top-level seed.
    static std::uint64_t derive(std::uint64_t seed, std::string_view stage) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : stage) {
            h ^= std::uint64_t(static_cast<unsigned char>(c));
            h *= 0x100000001B3ULL;
        }
        Rng mix(seed ^ h);
        return mix.next_u64();
    }

private:
    std::uint64_t state_;
};

} // namespace splat
