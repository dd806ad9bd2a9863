#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/measure.hpp"

namespace ergolab {

// A fully explicit finite-state chain: transition matrix, display labels,
// and a metric matrix bounded by 1. Everything the exact estimators need.
struct FiniteChain {
    std::vector<std::vector<double>> P;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> dist;

    int size() const { return static_cast<int>(P.size()); }
};

// Validates and packs a chain: rows stochastic within 1e-12 (NotStochastic
// otherwise); dist symmetric, zero-diagonal, bounded by 1, triangle
// inequality on all k^3 triples within 1e-12 (BadParameter otherwise).
// Empty labels default to s0..s{k-1}.
FiniteChain make_finite_chain(std::vector<std::vector<double>> P,
                              std::vector<std::string> labels,
                              std::vector<std::vector<double>> dist);

// CSV loader: k matrix rows followed by k metric rows (k taken from the
// field count of the first row). Blank lines and '#' comments are skipped.
FiniteChain load_finite_chain_csv(const std::string& path);

// Row x of P^n as a plain vector (fixed summation order, compensated dots).
std::vector<double> matrix_power_row(const std::vector<std::vector<double>>& P, int x, int n);

// Row x of P^n as a measure over state indices.
DiscreteMeasure<int> matrix_power_marginal(const FiniteChain& chain, int x, int n);

// The unique solution of pi P = pi, sum pi = 1, by a rank-revealing dense
// solve; throws NonUniqueStationary when the fixed-point space has dimension
// != 1. The result satisfies ||pi P - pi||_inf <= 1e-12.
DiscreteMeasure<int> stationary_distribution(const FiniteChain& chain);

// Exact L^p error of the Birkhoff average over the window M_1..M_t started
// at x: (sum over all k^t paths of prob * |mean of f - pi(f)|^p)^(1/p),
// with pi(f) taken from stationary_distribution. Depth-first enumeration in
// branch order, probability pruning below 1e-16.
double exact_lp_error(const FiniteChain& chain, int x, const std::vector<double>& f,
                      double p, int t);

// Exact E^x[(mean of f over M_1..M_t)^2] - pi(f)^2 by the same enumeration.
double exact_second_moment(const FiniteChain& chain, int x, const std::vector<double>& f,
                           int t);

// Exact E^x[mean of f over M_1..M_t] by the same enumeration (cross-check
// ingredient tying exact_lp_error(p=2) to exact_second_moment).
double exact_mean_time_average(const FiniteChain& chain, int x, const std::vector<double>& f,
                               int t);

}  // namespace ergolab
