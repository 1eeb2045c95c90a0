#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dispersim/lattice.hpp"

namespace testing {

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240917);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

/// Random complex values on [offset, offset + size).
inline dispersim::LatticeState random_state(std::int64_t offset, std::size_t size) {
    std::vector<dispersim::cdouble> v(size);
    for (auto& x : v) x = {uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
    return dispersim::LatticeState(offset, std::move(v));
}

inline std::vector<dispersim::cdouble> random_values(std::size_t size) {
    std::vector<dispersim::cdouble> v(size);
    for (auto& x : v) x = {uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
    return v;
}

}  // namespace testing
