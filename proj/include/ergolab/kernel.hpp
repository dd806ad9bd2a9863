#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/measure.hpp"
#include "ergolab/metric.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// State of the delay equation: values of the path on the uniform grid
// -1, -1+h, ..., 0 where the mesh h divides 1 exactly.
struct PathSegment {
    std::vector<double> values;

    PathSegment() = default;
    explicit PathSegment(std::vector<double> v) : values(std::move(v)) {
        if (values.size() < 2) throw BadGrid("PathSegment: grid needs at least 2 nodes");
    }
    static PathSegment constant(double level, int nodes_per_unit) {
        if (nodes_per_unit < 1) throw BadGrid("PathSegment: mesh must divide 1");
        return PathSegment(std::vector<double>(static_cast<std::size_t>(nodes_per_unit) + 1, level));
    }

    double mesh() const { return 1.0 / static_cast<double>(values.size() - 1); }
    // Right endpoint: the current value M_t.
    double head() const { return values.back(); }
    // Left endpoint: the value one delay unit back, M_{t-1}.
    double delayed() const { return values.front(); }

    friend auto operator<=>(const PathSegment& a, const PathSegment& b) {
        return a.values <=> b.values;
    }
    friend bool operator==(const PathSegment& a, const PathSegment& b) = default;
};

// Sup distance between matching grids, scaled by the truncation scale delta:
// 1 and |x-y|_inf / delta.
inline double path_sup_distance(const PathSegment& a, const PathSegment& b) {
    if (a.values.size() != b.values.size()) {
        throw BadGrid("path distance: mismatched grids");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    }
    return m;
}

// A sampleable Markov transition rule on a metric state space. `step` must
// be a pure function of (state, stream position): replaying the same stream
// reproduces the same output. `exact_marginal`, when set, returns the exact
// n-step pushforward from a point.
template <class S>
struct Kernel {
    MetricSpace<S> space;
    std::function<S(const S&, RngStream&)> step;
    double time_step = 1.0;        // time advanced by one application of step
    bool continuous_time = false;  // discrete chain vs Euler scheme of an SDE
    std::function<DiscreteMeasure<S>(const S&, int)> exact_marginal;  // optional
    std::vector<std::string> labels;  // optional display names for finite state sets
};

// A simulated path: states at times 0, step, 2*step, ...
template <class S>
struct Trajectory {
    std::vector<S> states;
    double step = 1.0;
    std::string origin;

    Trajectory() = default;
    Trajectory(std::vector<S> st, double dt, std::string org)
        : states(std::move(st)), step(dt), origin(std::move(org)) {
        if (states.empty()) throw EmptyTrajectory("Trajectory: no states");
        if (!(step > 0.0)) throw BadParameter("Trajectory: step must be positive");
    }
};

namespace detail {

// Number of kernel applications needed to reach `horizon` in time units.
template <class S>
std::int64_t step_count(const Kernel<S>& kernel, double horizon) {
    if (horizon < 0.0) throw BadParameter("horizon must be nonnegative");
    return static_cast<std::int64_t>(std::floor(horizon / kernel.time_step + 1e-9));
}

// One categorical draw: inverse-CDF walk over weights, consuming exactly one
// uniform from the stream.
inline std::size_t draw_categorical(std::span<const double> weights, RngStream& rng) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        cum += weights[j];
        if (u < cum) return j;
    }
    return weights.size() - 1;  // guard against cum < 1 by floating dust
}

}  // namespace detail

// Runs one trajectory from x0 to the horizon. Deterministic in
// (kernel, x0, seed); the path consumes substream(seed, 0).
template <class S>
Trajectory<S> simulate(const Kernel<S>& kernel, const S& x0, double horizon,
                       std::uint64_t seed) {
    const std::int64_t n = detail::step_count(kernel, horizon);
    RngStream rng = RngStream::substream(seed, 0);
    std::vector<S> states;
    states.reserve(static_cast<std::size_t>(n) + 1);
    states.push_back(x0);
    S x = x0;
    for (std::int64_t i = 0; i < n; ++i) {
        x = kernel.step(x, rng);
        states.push_back(x);
    }
    return Trajectory<S>(std::move(states), kernel.time_step, "x0");
}

// n independent end states at time t, trajectory i on substream(seed, i).
// Results are bitwise identical for any worker count: each index owns its
// stream and its output slot.
template <class S>
EmpiricalMeasure<S> marginal_sample(const Kernel<S>& kernel, const S& init, double t,
                                    std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw BadParameter("marginal_sample: n must be >= 1");
    const std::int64_t steps = detail::step_count(kernel, t);
    std::vector<S> out(static_cast<std::size_t>(n), init);
    parallel_for_indexed(static_cast<std::size_t>(n), [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        S x = init;
        for (std::int64_t k = 0; k < steps; ++k) x = kernel.step(x, rng);
        out[i] = std::move(x);
    });
    return EmpiricalMeasure<S>(std::move(out));
}

// Same, but the start point of trajectory i is itself drawn from `init`
// (one extra uniform at the head of substream i).
template <class S>
EmpiricalMeasure<S> marginal_sample(const Kernel<S>& kernel, const DiscreteMeasure<S>& init,
                                    double t, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw BadParameter("marginal_sample: n must be >= 1");
    const std::int64_t steps = detail::step_count(kernel, t);
    std::vector<S> out(static_cast<std::size_t>(n), init.atoms().front());
    parallel_for_indexed(static_cast<std::size_t>(n), [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        S x = init.atoms()[detail::draw_categorical(init.weights(), rng)];
        for (std::int64_t k = 0; k < steps; ++k) x = kernel.step(x, rng);
        out[i] = std::move(x);
    });
    return EmpiricalMeasure<S>(std::move(out));
}

}  // namespace ergolab
