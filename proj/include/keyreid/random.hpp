// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace keyreid {

/// Seeded random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the distributions below are
/// written out here (not taken from <random>) so that generated data is the
/// same with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Standard normal, Box-Muller.
    double normal();
    double exponential(double mean);
    /// Uniform in [0, n), unbiased.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finaliser over (master, stream): independent seeds for trials
/// and generator sub-streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace keyreid
