#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ergolab/transport.hpp"

namespace ergolab {

struct DualSolution {
    double value = 0.0;
    std::vector<double> potential;  // one entry per joint-support atom
};

// Kantorovich-Rubinstein dual over a finite joint support: maximize
// sum_i potential[i] * signed_mass[i] subject to
// |potential[i] - potential[j]| <= dist(i,j). signed_mass must sum to 0
// (difference of two probability vectors) and dist must be a metric bounded
// by 1. Solved as a dense LP by a primal simplex started from the slack
// basis; entirely independent of the transportation-simplex primal route.
DualSolution solve_kr_dual(std::span<const double> signed_mass, const CostMatrix& dist,
                           std::int64_t max_iters = 1000000);

}  // namespace ergolab
