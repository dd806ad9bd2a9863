#include "ergolab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/errors.hpp"
#include "ergolab/numerics.hpp"

namespace ergolab {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kOptTol = 1e-10;

// Dense tableau simplex for: maximize c.x subject to A x <= b, x >= 0,
// with b >= 0 (slack basis feasible). Dantzig pricing with a Bland fallback.
struct SimplexResult {
    double value = 0.0;
    std::vector<double> x;
};

SimplexResult maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c, std::int64_t max_iters) {
    const int m = static_cast<int>(A.size());
    const int n = static_cast<int>(c.size());
    const int width = n + m + 1;

    // tableau rows: [A | I | b]; last row holds reduced costs [-c | 0 | 0].
    std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for (int j = 0; j < n; ++j) t[m][j] = -c[j];

    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    bool bland = false;
    std::int64_t iters = 0;
    while (true) {
        if (++iters > max_iters) throw SolverFailure("simplex: iteration cap exceeded");
        if (iters % 8192 == 0) bland = true;

        int col = -1;
        double best = -kOptTol;
        for (int j = 0; j < width - 1; ++j) {
            if (t[m][j] < best) {
                best = t[m][j];
                col = j;
                if (bland) break;
            }
        }
        if (col < 0) break;  // optimal

        int row = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (t[i][col] > kPivotTol) {
                const double ratio = t[i][width - 1] / t[i][col];
                if (ratio < best_ratio - 1e-15 ||
                    (ratio <= best_ratio + 1e-15 && row >= 0 && basis[i] < basis[row])) {
                    best_ratio = ratio;
                    row = i;
                }
            }
        }
        if (row < 0) throw SolverFailure("simplex: unbounded direction");

        // Gauss-Jordan pivot on (row, col).
        const double piv = t[row][col];
        for (int j = 0; j < width; ++j) t[row][j] /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            const double factor = t[i][col];
            if (factor == 0.0) continue;
            for (int j = 0; j < width; ++j) t[i][j] -= factor * t[row][j];
        }
        basis[row] = col;
    }

    SimplexResult res;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) res.x[basis[i]] = t[i][width - 1];
    }
    res.value = t[m][width - 1];
    return res;
}

}  // namespace

DualSolution solve_kr_dual(std::span<const double> signed_mass, const CostMatrix& dist,
                           std::int64_t max_iters) {
    const int k = static_cast<int>(signed_mass.size());
    if (k == 0) throw BadParameter("solve_kr_dual: empty support");
    if (dist.rows != k || dist.cols != k) {
        throw BadParameter("solve_kr_dual: distance matrix shape mismatch");
    }
    if (k == 1) return {0.0, {0.0}};

    // Substitute v_i = f_i + 1. Since the metric is bounded by 1 the optimum
    // can be taken with f in [-1, 1], so v lives in [0, 2] and v = 0 (all
    // potentials equal) satisfies every pair constraint: the slack basis
    // starts feasible without a phase one. The objective only shifts by
    // sum(signed_mass), which is zero up to float dust.
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    A.reserve(static_cast<std::size_t>(k) * (k - 1) + k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double d = dist.at(i, j);
            // v_i - v_j <= d and v_j - v_i <= d.
            std::vector<double> row_pos(k, 0.0), row_neg(k, 0.0);
            row_pos[i] = 1.0;
            row_pos[j] = -1.0;
            row_neg[i] = -1.0;
            row_neg[j] = 1.0;
            A.push_back(std::move(row_pos));
            b.push_back(d);
            A.push_back(std::move(row_neg));
            b.push_back(d);
        }
    }
    for (int i = 0; i < k; ++i) {
        std::vector<double> row(k, 0.0);
        row[i] = 1.0;
        A.push_back(std::move(row));
        b.push_back(2.0);
    }

    const std::vector<double> c(signed_mass.begin(), signed_mass.end());
    const SimplexResult lp = maximize(A, b, c, max_iters);

    DualSolution out;
    out.potential.assign(k, 0.0);
    for (int i = 0; i < k; ++i) out.potential[i] = lp.x[i] - 1.0;
    out.value = lp.value - kahan_sum(c);
    return out;
}

}  // namespace ergolab
