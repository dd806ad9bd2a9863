#include "ergolab/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/numerics.hpp"

namespace ergolab {

FiniteChain make_finite_chain(std::vector<std::vector<double>> P,
                              std::vector<std::string> labels,
                              std::vector<std::vector<double>> dist) {
    const std::size_t k = P.size();
    if (k == 0) throw NotStochastic("finite chain: empty matrix");
    for (const auto& row : P) {
        if (row.size() != k) throw NotStochastic("finite chain: matrix is not square");
        for (double p : row) {
            if (!(p >= 0.0)) throw NotStochastic("finite chain: negative entry");
        }
        if (std::abs(kahan_sum(row) - 1.0) > 1e-12) {
            throw NotStochastic("finite chain: row does not sum to 1");
        }
    }
    if (dist.size() != k) throw BadParameter("finite chain: dist size mismatch");
    for (std::size_t i = 0; i < k; ++i) {
        if (dist[i].size() != k) throw BadParameter("finite chain: dist size mismatch");
        if (dist[i][i] != 0.0) throw BadParameter("finite chain: dist diagonal must be zero");
        for (std::size_t j = 0; j < k; ++j) {
            if (!(dist[i][j] >= 0.0 && dist[i][j] <= 1.0)) {
                throw BadParameter("finite chain: dist entries must lie in [0,1]");
            }
            if (std::abs(dist[i][j] - dist[j][i]) > 1e-12) {
                throw BadParameter("finite chain: dist must be symmetric");
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t m = 0; m < k; ++m) {
                if (dist[i][m] > dist[i][j] + dist[j][m] + 1e-12) {
                    throw BadParameter("finite chain: dist violates the triangle inequality");
                }
            }
        }
    }
    if (labels.empty()) {
        labels.resize(k);
        for (std::size_t i = 0; i < k; ++i) labels[i] = "s" + std::to_string(i);
    }
    if (labels.size() != k) throw BadParameter("finite chain: label count mismatch");
    return FiniteChain{std::move(P), std::move(labels), std::move(dist)};
}

FiniteChain load_finite_chain_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open chain file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            row.push_back(parse_double_field(field, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": field count differs from the first row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("chain file has no data rows: " + path);
    const std::size_t k = rows.front().size();
    if (rows.size() != 2 * k) {
        throw ConfigError("chain file must hold " + std::to_string(2 * k) +
                          " rows (matrix then metric), got " + std::to_string(rows.size()));
    }
    std::vector<std::vector<double>> P(rows.begin(), rows.begin() + static_cast<long>(k));
    std::vector<std::vector<double>> dist(rows.begin() + static_cast<long>(k), rows.end());
    return make_finite_chain(std::move(P), {}, std::move(dist));
}

std::vector<double> matrix_power_row(const std::vector<std::vector<double>>& P, int x, int n) {
    const std::size_t k = P.size();
    if (x < 0 || static_cast<std::size_t>(x) >= k) {
        throw BadParameter("matrix_power_row: state index out of range");
    }
    if (n < 0) throw BadParameter("matrix_power_row: n must be nonnegative");
    std::vector<double> v(k, 0.0);
    v[static_cast<std::size_t>(x)] = 1.0;
    std::vector<double> next(k);
    std::vector<double> terms(k);
    for (int s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < k; ++i) terms[i] = v[i] * P[i][j];
            next[j] = kahan_sum(terms);
        }
        v.swap(next);
    }
    return v;
}

DiscreteMeasure<int> matrix_power_marginal(const FiniteChain& chain, int x, int n) {
    std::vector<double> row = matrix_power_row(chain.P, x, n);
    std::vector<int> atoms(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) atoms[i] = static_cast<int>(i);
    return DiscreteMeasure<int>(std::move(atoms), std::move(row));
}

DiscreteMeasure<int> stationary_distribution(const FiniteChain& chain) {
    const int k = chain.size();
    Eigen::MatrixXd A(k, k);  // A = P^T - I, whose kernel holds pi
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            A(j, i) = chain.P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                      (i == j ? 1.0 : 0.0);
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    // Pivots below this relative size count as zero when ranking. The
    // stochastic matrices here are O(1), so genuine kernel directions sit at
    // machine-epsilon pivot scale while true rank contributions stay O(1);
    // the final residual check below backstops any misjudgment.
    lu.setThreshold(1e-9);
    if (lu.dimensionOfKernel() != 1) {
        throw NonUniqueStationary("stationary_distribution: fixed-point space dimension " +
                                  std::to_string(lu.dimensionOfKernel()));
    }
    Eigen::VectorXd v = lu.kernel().col(0);
    double total = v.sum();
    if (total == 0.0) throw SolverFailure("stationary_distribution: degenerate kernel vector");
    v /= total;
    std::vector<double> pi(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        if (v(i) < -1e-12) {
            throw SolverFailure("stationary_distribution: negative stationary mass");
        }
        pi[static_cast<std::size_t>(i)] = std::max(v(i), 0.0);
    }
    const double norm = kahan_sum(pi);
    for (double& w : pi) w /= norm;

    // Certify the fixed point to the promised tolerance.
    std::vector<double> terms(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            terms[static_cast<std::size_t>(i)] =
                pi[static_cast<std::size_t>(i)] *
                chain.P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        if (std::abs(kahan_sum(terms) - pi[static_cast<std::size_t>(j)]) > 1e-12) {
            throw SolverFailure("stationary_distribution: residual above 1e-12");
        }
    }
    std::vector<int> atoms(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) atoms[static_cast<std::size_t>(i)] = i;
    return DiscreteMeasure<int>(std::move(atoms), std::move(pi));
}

namespace {

// Depth-first walk over all t-step paths from x, visiting (probability,
// sum of f over M_1..M_t). Branches in state order; prunes below 1e-16.
template <class Visitor>
void enumerate_paths(const FiniteChain& chain, int x, const std::vector<double>& f,
                     int t, Visitor&& visit) {
    constexpr double kPruneBelow = 1e-16;
    const std::size_t k = static_cast<std::size_t>(chain.size());
    struct Frame {
        int state;
        double prob;
        double sum_f;
    };
    std::vector<Frame> stack;
    stack.push_back({x, 1.0, 0.0});
    std::vector<std::size_t> branch(static_cast<std::size_t>(t) + 1, 0);
    while (!stack.empty()) {
        const std::size_t depth = stack.size() - 1;
        if (depth == static_cast<std::size_t>(t)) {
            visit(stack.back().prob, stack.back().sum_f);
            stack.pop_back();
            continue;
        }
        std::size_t& j = branch[depth];
        const Frame& top = stack.back();
        bool descended = false;
        while (j < k) {
            const double p = top.prob * chain.P[static_cast<std::size_t>(top.state)][j];
            const std::size_t next = j++;
            if (p < kPruneBelow) continue;
            branch[depth + 1] = 0;
            stack.push_back({static_cast<int>(next), p,
                             top.sum_f + f[next]});
            descended = true;
            break;
        }
        if (!descended) {
            j = 0;
            stack.pop_back();
        }
    }
}

void check_enumeration_inputs(const FiniteChain& chain, int x, const std::vector<double>& f,
                              int t) {
    if (x < 0 || x >= chain.size()) throw BadParameter("path enumeration: bad state index");
    if (f.size() != static_cast<std::size_t>(chain.size())) {
        throw BadParameter("path enumeration: f must give one value per state");
    }
    if (t < 1) throw BadParameter("path enumeration: t must be >= 1");
    if (t > 12) throw CapExceeded("path enumeration: t above 12");
    double paths = 1.0;
    for (int i = 0; i < t; ++i) paths *= static_cast<double>(chain.size());
    if (paths > 1e7) throw CapExceeded("path enumeration: k^t above 1e7");
}

double pi_of_f(const FiniteChain& chain, const std::vector<double>& f) {
    const DiscreteMeasure<int> pi = stationary_distribution(chain);
    return pi.expectation([&f](int i) { return f[static_cast<std::size_t>(i)]; });
}

}  // namespace

double exact_lp_error(const FiniteChain& chain, int x, const std::vector<double>& f,
                      double p, int t) {
    if (p < 1.0) throw BadExponent("exact_lp_error: p must be >= 1");
    check_enumeration_inputs(chain, x, f, t);
    const double pif = pi_of_f(chain, f);
    double sum = 0.0, comp = 0.0;
    enumerate_paths(chain, x, f, t, [&](double prob, double sum_f) {
        const double term = prob * std::pow(std::abs(sum_f / t - pif), p);
        const double s = sum + term;
        comp += (std::abs(sum) >= term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
    });
    return std::pow(sum + comp, 1.0 / p);
}

double exact_second_moment(const FiniteChain& chain, int x, const std::vector<double>& f,
                           int t) {
    check_enumeration_inputs(chain, x, f, t);
    const double pif = pi_of_f(chain, f);
    double sum = 0.0, comp = 0.0;
    enumerate_paths(chain, x, f, t, [&](double prob, double sum_f) {
        const double a = sum_f / t;
        const double term = prob * a * a;
        const double s = sum + term;
        comp += (std::abs(sum) >= term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
    });
    return sum + comp - pif * pif;
}

double exact_mean_time_average(const FiniteChain& chain, int x, const std::vector<double>& f,
                               int t) {
    check_enumeration_inputs(chain, x, f, t);
    double sum = 0.0, comp = 0.0;
    enumerate_paths(chain, x, f, t, [&](double prob, double sum_f) {
        const double term = prob * (sum_f / t);
        const double s = sum + term;
        comp += (std::abs(sum) >= term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
    });
    return sum + comp;
}

}  // namespace ergolab
