#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ergolab {

// Dense row-major cost matrix for transport problems.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    CostMatrix() = default;
    CostMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

struct PlanEntry {
    int from = 0;
    int to = 0;
    double mass = 0.0;
};

// Primal optimal transport plan between two weight vectors. Row marginals of
// the entries reproduce the supply, column marginals the demand; objective is
// the total shipped cost.
struct TransportPlan {
    std::vector<PlanEntry> entries;
    double objective = 0.0;
};

// Exact balanced-transportation solve (transportation simplex with
// spanning-tree basis: northwest-corner start, most-negative-reduced-cost
// pivoting with a Bland fallback against cycling). supply and demand must
// each sum to 1; throws SolverFailure past max_pivots.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              const CostMatrix& cost, std::int64_t max_pivots = 1000000);

}  // namespace ergolab
