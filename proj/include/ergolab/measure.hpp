#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/numerics.hpp"

namespace ergolab {

inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kWeightDust = 1e-15;

// Probability measure with finite support. Construction canonicalizes:
// weights must be nonnegative and sum to 1 within 1e-12; weights below 1e-15
// are dropped and the rest renormalized; duplicate atoms are merged by
// summing weights. Atoms are kept sorted, so equal measures have equal
// representations.
template <class P>
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<P> atoms, std::vector<double> weights) {
        if (atoms.size() != weights.size()) {
            throw BadParameter("DiscreteMeasure: atoms and weights differ in length");
        }
        if (atoms.empty()) {
            throw BadParameter("DiscreteMeasure: empty support");
        }
        for (double w : weights) {
            if (!(w >= 0.0)) throw BadParameter("DiscreteMeasure: negative or NaN weight");
        }
        const double total = kahan_sum(weights);
        if (std::abs(total - 1.0) > kWeightSumTolerance) {
            throw BadParameter("DiscreteMeasure: weights sum to " + std::to_string(total) +
                               ", expected 1 within 1e-12");
        }

        // Sort atoms, merge duplicates, drop dust, renormalize.
        std::vector<std::size_t> order(atoms.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

        atoms_.reserve(atoms.size());
        weights_.reserve(atoms.size());
        for (std::size_t k : order) {
            if (!atoms_.empty() && atoms_.back() == atoms[k]) {
                weights_.back() += weights[k];
            } else {
                atoms_.push_back(std::move(atoms[k]));
                weights_.push_back(weights[k]);
            }
        }
        std::size_t out = 0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (weights_[i] < kWeightDust) continue;
            if (out != i) {  // guard the self-move: it would empty non-trivial atoms
                atoms_[out] = std::move(atoms_[i]);
                weights_[out] = weights_[i];
            }
            ++out;
        }
        atoms_.resize(out);
        weights_.resize(out);
        if (atoms_.empty()) throw BadParameter("DiscreteMeasure: all weights below dust threshold");
        const double kept = kahan_sum(weights_);
        for (double& w : weights_) w /= kept;
    }

    static DiscreteMeasure dirac(P atom) { return DiscreteMeasure({std::move(atom)}, {1.0}); }

    const std::vector<P>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }

    // Expectation of f under the measure.
    template <class Fn>
    double expectation(Fn&& f) const {
        std::vector<double> terms(atoms_.size());
        for (std::size_t i = 0; i < atoms_.size(); ++i) terms[i] = weights_[i] * f(atoms_[i]);
        return kahan_sum(terms);
    }

    friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
    }

    // Canonical total order (atom count, then atoms, then weights); used to
    // pick a fixed argument order inside symmetric distance computations.
    friend bool operator<(const DiscreteMeasure& a, const DiscreteMeasure& b) {
        if (a.atoms_.size() != b.atoms_.size()) return a.atoms_.size() < b.atoms_.size();
        if (a.atoms_ != b.atoms_) return a.atoms_ < b.atoms_;
        return a.weights_ < b.weights_;
    }

private:
    std::vector<P> atoms_;
    std::vector<double> weights_;
};

// Uniformly weighted sample list (repeats allowed): the Monte Carlo surrogate
// for a t-step marginal.
template <class P>
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<P> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw BadParameter("EmpiricalMeasure: need at least one sample");
    }

    const std::vector<P>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

    DiscreteMeasure<P> to_discrete() const {
        const double w = 1.0 / static_cast<double>(samples_.size());
        return DiscreteMeasure<P>(samples_, std::vector<double>(samples_.size(), w));
    }

private:
    std::vector<P> samples_;
};

}  // namespace ergolab
