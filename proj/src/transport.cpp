#include "ergolab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/errors.hpp"
#include "ergolab/numerics.hpp"

namespace ergolab {

namespace {

// Spanning-tree basis over the bipartite node set {rows 0..m-1, cols m..m+n-1}.
// Arcs are basic cells; there are always exactly m+n-1 of them (degenerate
// zero-mass cells included).
struct Basis {
    int m = 0;
    int n = 0;
    std::vector<int> row_of;                 // arc -> row
    std::vector<int> col_of;                 // arc -> col
    std::vector<double> mass;                // arc -> shipped mass
    std::vector<std::vector<int>> adjacency; // node -> incident arc ids

    int node_of_row(int i) const { return i; }
    int node_of_col(int j) const { return m + j; }

    int add_arc(int i, int j, double x) {
        const int id = static_cast<int>(row_of.size());
        row_of.push_back(i);
        col_of.push_back(j);
        mass.push_back(x);
        adjacency[node_of_row(i)].push_back(id);
        adjacency[node_of_col(j)].push_back(id);
        return id;
    }

    void replace_arc(int old_id, int i, int j) {
        auto detach = [&](int node) {
            auto& a = adjacency[node];
            a.erase(std::find(a.begin(), a.end(), old_id));
        };
        detach(node_of_row(row_of[old_id]));
        detach(node_of_col(col_of[old_id]));
        row_of[old_id] = i;
        col_of[old_id] = j;
        mass[old_id] = 0.0;
        adjacency[node_of_row(i)].push_back(old_id);
        adjacency[node_of_col(j)].push_back(old_id);
    }
};

// Northwest-corner start: a staircase of m+n-1 basic cells.
Basis northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    const int m = static_cast<int>(supply.size());
    const int n = static_cast<int>(demand.size());
    Basis basis;
    basis.m = m;
    basis.n = n;
    basis.adjacency.resize(static_cast<std::size_t>(m) + n);
    std::vector<double> ra(supply.begin(), supply.end());
    std::vector<double> rb(demand.begin(), demand.end());
    int i = 0, j = 0;
    while (true) {
        const double t = std::min(ra[i], rb[j]);
        basis.add_arc(i, j, t);
        ra[i] -= t;
        rb[j] -= t;
        if (i == m - 1 && j == n - 1) break;
        if (ra[i] <= 0.0 && i < m - 1) {
            ++i;
        } else {
            ++j;
        }
    }
    return basis;
}

// Node potentials from the basis tree: u[row 0] = 0, then u_i + v_j = c_ij
// along tree arcs.
void compute_potentials(const Basis& basis, const CostMatrix& cost, std::vector<double>& u,
                        std::vector<double>& v, std::vector<int>& stack,
                        std::vector<bool>& seen) {
    const int m = basis.m;
    const int n = basis.n;
    u.assign(m, 0.0);
    v.assign(n, 0.0);
    seen.assign(static_cast<std::size_t>(m) + n, false);
    stack.clear();
    stack.push_back(0);
    seen[0] = true;
    while (!stack.empty()) {
        const int node = stack.back();
        stack.pop_back();
        for (int arc : basis.adjacency[node]) {
            const int ri = basis.row_of[arc];
            const int cj = basis.col_of[arc];
            const int other = (node == basis.node_of_row(ri)) ? basis.node_of_col(cj)
                                                              : basis.node_of_row(ri);
            if (seen[other]) continue;
            seen[other] = true;
            if (other >= m) {
                v[other - m] = cost.at(ri, cj) - u[ri];
            } else {
                u[other] = cost.at(ri, cj) - v[cj];
            }
            stack.push_back(other);
        }
    }
}

// Tree path from the row node of the entering cell to its column node.
// Returns arc ids in walk order starting at the column end, which makes the
// k-th walked arc carry sign (-1)^(k+1) relative to the +theta entering arc.
std::vector<int> tree_path(const Basis& basis, int from_row, int to_col,
                           std::vector<int>& parent_arc, std::vector<int>& parent_node,
                           std::vector<int>& queue) {
    const int total = basis.m + basis.n;
    parent_arc.assign(total, -1);
    parent_node.assign(total, -1);
    queue.clear();
    const int src = basis.node_of_row(from_row);
    const int dst = basis.node_of_col(to_col);
    queue.push_back(src);
    parent_node[src] = src;
    std::size_t head = 0;
    while (head < queue.size()) {
        const int node = queue[head++];
        if (node == dst) break;
        for (int arc : basis.adjacency[node]) {
            const int ri = basis.row_of[arc];
            const int cj = basis.col_of[arc];
            const int other = (node == basis.node_of_row(ri)) ? basis.node_of_col(cj)
                                                              : basis.node_of_row(ri);
            if (parent_node[other] != -1) continue;
            parent_node[other] = node;
            parent_arc[other] = arc;
            queue.push_back(other);
        }
    }
    std::vector<int> path;
    for (int node = dst; node != src; node = parent_node[node]) {
        path.push_back(parent_arc[node]);
    }
    return path;
}

}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              const CostMatrix& cost, std::int64_t max_pivots) {
    const int m = static_cast<int>(supply.size());
    const int n = static_cast<int>(demand.size());
    if (m == 0 || n == 0) throw BadParameter("solve_transport: empty marginal");
    if (cost.rows != m || cost.cols != n) {
        throw BadParameter("solve_transport: cost matrix shape mismatch");
    }

    Basis basis = northwest_corner(supply, demand);

    std::vector<double> u, v;
    std::vector<int> scratch_stack, parent_arc, parent_node, queue;
    std::vector<bool> seen;

    const double opt_tol = 1e-12;
    bool bland = false;
    std::int64_t pivots = 0;
    while (true) {
        if (++pivots > max_pivots) {
            throw SolverFailure("solve_transport: pivot cap exceeded (degenerate weights?)");
        }
        if (pivots % 4096 == 0) bland = true;  // anti-cycling fallback

        compute_potentials(basis, cost, u, v, scratch_stack, seen);

        // Entering cell: most negative reduced cost (or first, under Bland).
        int enter_i = -1, enter_j = -1;
        double best = -opt_tol;
        for (int i = 0; i < m && (enter_i < 0 || !bland); ++i) {
            const double ui = u[i];
            for (int j = 0; j < n; ++j) {
                const double r = cost.at(i, j) - ui - v[j];
                if (r < best) {
                    best = r;
                    enter_i = i;
                    enter_j = j;
                    if (bland) break;
                }
            }
        }
        if (enter_i < 0) break;  // optimal

        const auto path = tree_path(basis, enter_i, enter_j, parent_arc, parent_node, queue);

        // Arcs at even walk positions leave mass (sign -theta). Ties break on
        // cell coordinates, the fixed variable order Bland's rule needs.
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        auto cell_less = [&basis](int a, int b) {
            return basis.row_of[a] != basis.row_of[b] ? basis.row_of[a] < basis.row_of[b]
                                                      : basis.col_of[a] < basis.col_of[b];
        };
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const int arc = path[k];
            if (basis.mass[arc] < theta ||
                (basis.mass[arc] == theta && (leave < 0 || cell_less(arc, leave)))) {
                theta = basis.mass[arc];
                leave = arc;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            const int arc = path[k];
            if (k % 2 == 0) {
                basis.mass[arc] -= theta;
            } else {
                basis.mass[arc] += theta;
            }
        }
        basis.replace_arc(leave, enter_i, enter_j);
        basis.mass[leave] = theta;
    }

    TransportPlan plan;
    plan.entries.reserve(basis.mass.size());
    for (std::size_t arc = 0; arc < basis.mass.size(); ++arc) {
        if (basis.mass[arc] > 0.0) {
            plan.entries.push_back({basis.row_of[arc], basis.col_of[arc], basis.mass[arc]});
        }
    }
    std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    std::vector<double> terms(plan.entries.size());
    for (std::size_t k = 0; k < plan.entries.size(); ++k) {
        terms[k] = plan.entries[k].mass * cost.at(plan.entries[k].from, plan.entries[k].to);
    }
    plan.objective = kahan_sum(terms);
    return plan;
}

}  // namespace ergolab
