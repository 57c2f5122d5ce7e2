// SPDX-License-Identifier: Apache-2.0
//
// risopt - joint precoder / RIS phase-shift optimization library
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>

#include "risopt/core.hpp"

namespace risopt {

// Deterministic RNG layer. All distributions are implemented here (not via
// <random>) so that byte streams are identical across platforms and standard
// libraries; Monte Carlo outputs depend only on (config, seed).

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream-splitting rule: the seed of worker stream `index` under a master
// seed is mix64(master, index). This mapping is part of the reproducibility
// contract and must not change between versions.
inline constexpr std::uint64_t mix64(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15ull));
}

// xoshiro256++ (Blackman/Vigna), seeded through splitmix64.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = splitmix64(x);
            word = x;
        }
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached so consecutive calls consume a fixed number of raw draws.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Circularly symmetric complex normal with E[|z|^2] = variance.
    cdouble complex_normal(double variance = 1.0) {
        const double s = std::sqrt(variance * 0.5);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    // Phase drawn uniformly over [0, 2*pi).
    double phase() { return uniform(0.0, 2.0 * kPi); }

    // Uniform integer in [lo, hi], both inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_spare_;
    double spare_;
};

// Convenience builders used all over the tests and the harness.

inline CMat random_complex_matrix(int rows, int cols, RandomStream& rng, double variance = 1.0) {
    CMat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_normal(variance);
    return m;
}

inline CVec random_unit_modulus(int n, double amplitude, RandomStream& rng) {
    CVec v(n);
    for (int i = 0; i < n; ++i) {
        const double th = rng.phase();
        v(i) = amplitude * cdouble(std::cos(th), std::sin(th));
    }
    return v;
}

} // namespace risopt
