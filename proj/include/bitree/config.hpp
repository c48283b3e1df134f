#pragma once

#include <cstdint>
#include <string>

#include "bitree/geometry.hpp"

namespace bitree {

struct Config {
    int max_exhaustive_support = 20;
    double spectral_tol = 1e-10;
    double equilibrium_tol = 1e-9;
    double identity_tol = 1e-12;
    int search_restarts = 32;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    GeometryLimits limits{};
};

}  // namespace bitree
