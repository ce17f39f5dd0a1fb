#pragma once

#include <random>

#include "cftrack/features.hpp"

namespace bench {

inline cftrack::FeatureStack random_stack(cftrack::Grid2 grid, int depth, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cftrack::FeatureStack s;
    s.grid = grid;
    for (int d = 0; d < depth; ++d) {
        cftrack::RealArray a(grid);
        for (double& v : a) v = u(rng);
        s.channels.push_back(std::move(a));
    }
    return s;
}

}  // namespace bench
