#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/kernel.hpp"
#include "ergolab/measure.hpp"
#include "ergolab/metric.hpp"
#include "ergolab/numerics.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/wasserstein.hpp"

namespace ergolab {

// A Lipschitz observable with its declared bounds.
template <class S>
struct TestFunction {
    std::function<double(const S&)> eval;
    double lipschitz_bound = 0.0;  // declared |f|_Lip
    double sup_bound = 0.0;        // declared |f|_inf
    std::string name;
};

// Point estimate with a 95% confidence half-width (0 when exact).
struct Estimate {
    double value = 0.0;
    double half_width = 0.0;
};

struct CurveEntry {
    double t = 0.0;
    double value = 0.0;
    double half_width = 0.0;
    std::int64_t n_samples = 0;
};

// t-indexed estimates, strictly increasing in t; the carrier between
// estimators, rate fitting, and CSV reports.
struct ConvergenceCurve {
    std::vector<CurveEntry> entries;

    void append(double t, double value, double half_width, std::int64_t n_samples);
    std::string to_csv() const;  // header t,value,half_width,n
};

// Fitted exponential envelope value(t) = C * exp(-c t) on a t-window.
struct RateFit {
    double C = 0.0;
    double c = 0.0;
    double residual = 0.0;  // RMS of log-scale residuals on the window
    double window_lo = 0.0;
    double window_hi = 0.0;

    std::string to_csv() const;  // header C,c,residual,window_lo,window_hi
};

// Least-squares line through (t, log value) on the entries with
// window_lo <= t <= window_hi: C = exp(intercept), c = -slope. Requires at
// least 3 windowed entries, all with positive values (NonPositiveValue
// otherwise: the curve has hit its noise floor, shrink the window).
RateFit rate_fit(const ConvergenceCurve& curve, double window_lo, double window_hi);

// ---------------------------------------------------------------------------
// Birkhoff averages
// ---------------------------------------------------------------------------

// Running mean of f over the handed trajectory, which is read as the window
// [0, t): every stored state is one left endpoint of the time partition, so
// discrete counting averages and left-endpoint Riemann sums are the same
// arithmetic mean.
template <class S>
double time_average(const Trajectory<S>& traj, const TestFunction<S>& f) {
    if (traj.states.empty()) throw EmptyTrajectory("time_average: empty trajectory");
    std::vector<double> vals(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) vals[i] = f.eval(traj.states[i]);
    return mean(vals);
}

namespace detail {

// The t-state averaging window of a freshly simulated path M_0..M_N
// (N = steps to time t). Discrete chains average M_1..M_N, matching the
// path-enumeration oracle; Euler schemes average the left endpoints
// M_0..M_{N-1} of the integration mesh.
template <class S>
std::int64_t window_steps(const Kernel<S>& kernel, double t) {
    const std::int64_t n = step_count(kernel, t);
    if (n < 1) throw BadParameter("time window shorter than one step");
    return n;
}

// Walks one trajectory on `rng` and hands f(state) for each of the N window
// states to `sink`, honoring the window convention above.
template <class S, class Sink>
void walk_window(const Kernel<S>& kernel, S x, std::int64_t n_steps,
                 const TestFunction<S>& f, RngStream& rng, Sink&& sink) {
    if (kernel.continuous_time) sink(f.eval(x));
    for (std::int64_t k = 0; k < n_steps; ++k) {
        x = kernel.step(x, rng);
        if (!kernel.continuous_time || k + 1 < n_steps) sink(f.eval(x));
    }
}

// Exact pushforward from a point, with the 0-step case total for every
// kernel.
template <class S>
DiscreteMeasure<S> point_marginal(const Kernel<S>& kernel, const S& x, std::int64_t steps) {
    if (steps == 0) return DiscreteMeasure<S>::dirac(x);
    if (!kernel.exact_marginal) {
        throw BadParameter("exact mode requires a kernel with an exact pushforward");
    }
    return kernel.exact_marginal(x, static_cast<int>(steps));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// L^p error of the time average
// ---------------------------------------------------------------------------

namespace detail {

inline Estimate lp_estimate_from_moments(std::span<const double> devs_p, double p) {
    const double m = mean(devs_p);
    const double hw_mean = mean_half_width_95(devs_p);
    Estimate out;
    out.value = std::pow(m, 1.0 / p);
    // Delta method through x -> x^(1/p).
    if (hw_mean == 0.0 || m == 0.0) {
        out.half_width = (p == 1.0) ? hw_mean : 0.0;
    } else {
        out.half_width = hw_mean * (1.0 / p) * std::pow(m, 1.0 / p - 1.0);
    }
    return out;
}

}  // namespace detail

// Monte Carlo estimate of (E|A_t f - pi_ref|^p)^(1/p) over n_traj
// trajectories from x0, with a delta-method 95% half-width. Trajectory i
// consumes substream(seed, i); the reduction order is fixed, so the result
// is identical for every worker count.
template <class S>
Estimate lp_error(const Kernel<S>& kernel, const S& x0, const TestFunction<S>& f, double p,
                  double t, double pi_ref, std::int64_t n_traj, std::uint64_t seed) {
    if (p < 1.0) throw BadExponent("lp_error: p must be >= 1");
    if (n_traj < 2) throw BadParameter("lp_error: need at least 2 trajectories");
    const std::int64_t steps = detail::window_steps(kernel, t);
    std::vector<double> devs(static_cast<std::size_t>(n_traj));
    parallel_for_indexed(static_cast<std::size_t>(n_traj), [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        double sum = 0.0;
        detail::walk_window(kernel, x0, steps, f, rng, [&](double v) { sum += v; });
        const double avg = sum / static_cast<double>(steps);
        devs[i] = std::pow(std::abs(avg - pi_ref), p);
    });
    return detail::lp_estimate_from_moments(devs, p);
}

// lp_error on a whole t-grid with one shared trajectory sweep per replicate:
// trajectory i is walked once to the largest t and the running average is
// read off at every grid point. Because trajectory i always consumes the
// prefix of substream(seed, i), every entry is bitwise identical to a
// standalone lp_error call at that t.
template <class S>
ConvergenceCurve lp_error_profile(const Kernel<S>& kernel, const S& x0,
                                  const TestFunction<S>& f, double p,
                                  const std::vector<double>& t_grid, double pi_ref,
                                  std::int64_t n_traj, std::uint64_t seed) {
    if (p < 1.0) throw BadExponent("lp_error: p must be >= 1");
    if (n_traj < 2) throw BadParameter("lp_error: need at least 2 trajectories");
    if (t_grid.empty()) throw BadGrid("lp_error_profile: empty t grid");
    std::vector<std::int64_t> checkpoints(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        checkpoints[j] = detail::window_steps(kernel, t_grid[j]);
        if (j > 0 && checkpoints[j] <= checkpoints[j - 1]) {
            throw BadGrid("lp_error_profile: t grid must be strictly increasing");
        }
    }
    const std::size_t n_grid = t_grid.size();
    const auto n = static_cast<std::size_t>(n_traj);
    std::vector<double> devs(n_grid * n);
    parallel_for_indexed(n, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        double sum = 0.0;
        std::int64_t count = 0;
        std::size_t next = 0;
        detail::walk_window(kernel, x0, checkpoints.back(), f, rng, [&](double v) {
            sum += v;
            ++count;
            while (next < n_grid && count == checkpoints[next]) {
                const double avg = sum / static_cast<double>(count);
                devs[next * n + i] = std::pow(std::abs(avg - pi_ref), p);
                ++next;
            }
        });
    });
    ConvergenceCurve curve;
    for (std::size_t j = 0; j < n_grid; ++j) {
        const Estimate e = detail::lp_estimate_from_moments(
            std::span<const double>(devs).subspan(j * n, n), p);
        curve.append(t_grid[j], e.value, e.half_width, n_traj);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Marginal convergence to the invariant measure
// ---------------------------------------------------------------------------

// W1 between the t-step marginal from x and pi_hat for each t in t_grid.
// Empirical mode (default) shares one trajectory sweep per replicate across
// the grid (bitwise identical to per-t marginal_sample calls) and reports a
// batch-means half-width over 10 sample batches. Exact mode uses the
// kernel's exact pushforward and reports half-width 0.
template <class S>
ConvergenceCurve marginal_convergence(const Kernel<S>& kernel, const S& x,
                                      const DiscreteMeasure<S>& pi_hat,
                                      const std::vector<double>& t_grid, std::int64_t n,
                                      std::uint64_t seed, bool exact = false) {
    if (t_grid.empty()) throw BadGrid("marginal_convergence: empty t grid");
    std::vector<std::int64_t> checkpoints(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        checkpoints[j] = detail::step_count(kernel, t_grid[j]);
        if (j > 0 && checkpoints[j] <= checkpoints[j - 1]) {
            throw BadGrid("marginal_convergence: t grid must be strictly increasing");
        }
    }
    ConvergenceCurve curve;
    if (exact) {
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const DiscreteMeasure<S> marginal = detail::point_marginal(kernel, x, checkpoints[j]);
            const double w = w1_auto(marginal, pi_hat, kernel.space);
            curve.append(t_grid[j], w, 0.0, static_cast<std::int64_t>(marginal.size()));
        }
        return curve;
    }
    if (n < 1) throw BadParameter("marginal_convergence: n must be >= 1");
    const auto nn = static_cast<std::size_t>(n);
    const std::size_t n_grid = t_grid.size();
    std::vector<S> snap(n_grid * nn, x);
    parallel_for_indexed(nn, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        S state = x;
        std::int64_t count = 0;
        std::size_t next = 0;
        while (next < n_grid && count == checkpoints[next]) snap[next++ * nn + i] = state;
        while (next < n_grid) {
            state = kernel.step(state, rng);
            ++count;
            while (next < n_grid && count == checkpoints[next]) snap[next++ * nn + i] = state;
        }
    });
    constexpr std::size_t kBatches = 10;
    for (std::size_t j = 0; j < n_grid; ++j) {
        const auto first = snap.begin() + static_cast<std::ptrdiff_t>(j * nn);
        EmpiricalMeasure<S> emp(std::vector<S>(first, first + static_cast<std::ptrdiff_t>(nn)));
        const double value = w1_auto(emp.to_discrete(), pi_hat, kernel.space);
        double hw = 0.0;
        if (nn >= 2 * kBatches) {
            std::vector<double> batch_vals(kBatches);
            const std::size_t bsz = nn / kBatches;
            for (std::size_t b = 0; b < kBatches; ++b) {
                const auto lo = first + static_cast<std::ptrdiff_t>(b * bsz);
                EmpiricalMeasure<S> part(std::vector<S>(lo, lo + static_cast<std::ptrdiff_t>(bsz)));
                batch_vals[b] = w1_auto(part.to_discrete(), pi_hat, kernel.space);
            }
            hw = mean_half_width_95(batch_vals);
        }
        curve.append(t_grid[j], value, hw, n);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// The uniform integrated condition
// ---------------------------------------------------------------------------

// For each s in s_grid: draw n_outer starts y from the s-step marginal of x,
// estimate W1(t-step marginal of y, pi_hat) with n_inner samples each, and
// average. Returns the largest s-value with its half-width — a grid
// approximation of the sup over s (the grid used is echoed by the caller's
// report). Budget n_outer * n_inner * |s_grid| is capped.
template <class S>
Estimate uniform_condition(const Kernel<S>& kernel, const S& x,
                           const DiscreteMeasure<S>& pi_hat, double t,
                           const std::vector<double>& s_grid, std::int64_t n_outer,
                           std::int64_t n_inner, std::uint64_t seed,
                           double max_budget = 1e8) {
    if (s_grid.empty()) throw BadParameter("uniform_condition: empty s grid");
    if (n_outer < 2 || n_inner < 1) {
        throw BadParameter("uniform_condition: need n_outer >= 2, n_inner >= 1");
    }
    const double budget = static_cast<double>(n_outer) * static_cast<double>(n_inner) *
                          static_cast<double>(s_grid.size());
    if (budget > max_budget) {
        throw BudgetExceeded("uniform_condition: n_outer*n_inner*|s_grid| above the cap");
    }
    const std::int64_t t_steps = detail::step_count(kernel, t);
    Estimate best;
    for (std::size_t s_idx = 0; s_idx < s_grid.size(); ++s_idx) {
        const std::uint64_t outer_seed =
            RngStream::derive_key(seed, 2 * static_cast<std::uint64_t>(s_idx));
        const std::uint64_t inner_base =
            RngStream::derive_key(seed, 2 * static_cast<std::uint64_t>(s_idx) + 1);
        EmpiricalMeasure<S> starts = marginal_sample(kernel, x, s_grid[s_idx], n_outer, outer_seed);
        std::vector<double> vals(static_cast<std::size_t>(n_outer));
        parallel_for_indexed(static_cast<std::size_t>(n_outer), [&](std::size_t i) {
            RngStream rng = RngStream::substream(inner_base, static_cast<std::uint64_t>(i));
            std::vector<S> cloud(static_cast<std::size_t>(n_inner), starts.samples()[i]);
            for (auto& state : cloud) {
                S y = starts.samples()[i];
                for (std::int64_t k = 0; k < t_steps; ++k) y = kernel.step(y, rng);
                state = std::move(y);
            }
            vals[i] = w1_auto(EmpiricalMeasure<S>(std::move(cloud)).to_discrete(), pi_hat,
                              kernel.space);
        });
        const double estimate = mean(vals);
        const double hw = mean_half_width_95(vals);
        if (s_idx == 0 || estimate > best.value) best = {estimate, hw};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Contractivity and the Lipschitz semigroup
// ---------------------------------------------------------------------------

// Ratio d_W(t-step marginal of x1, t-step marginal of x2) / d(x1, x2); at
// most 1 for contractive kernels. Exact mode uses exact pushforwards, Monte
// Carlo mode two independent n-sample clouds.
template <class S>
double contraction_factor(const Kernel<S>& kernel, const S& x1, const S& x2, double t,
                          std::int64_t n, std::uint64_t seed, bool exact = false) {
    const double d0 = kernel.space.dist(x1, x2);
    if (d0 == 0.0) throw DegeneratePair("contraction_factor: d(x1,x2) = 0");
    const std::int64_t steps = detail::step_count(kernel, t);
    double w = 0.0;
    if (exact) {
        w = w1_auto(detail::point_marginal(kernel, x1, steps),
                    detail::point_marginal(kernel, x2, steps), kernel.space);
    } else {
        if (n < 1) throw BadParameter("contraction_factor: n must be >= 1");
        const auto mu = marginal_sample(kernel, x1, t, n, RngStream::derive_key(seed, 1));
        const auto nu = marginal_sample(kernel, x2, t, n, RngStream::derive_key(seed, 2));
        w = w1_auto(mu.to_discrete(), nu.to_discrete(), kernel.space);
    }
    return w / d0;
}

// Largest |P_t f(x) - P_t f(y)| / d(x,y) over the handed pairs: a lower
// bound for the Lipschitz constant of x -> E^x f(M_t).
template <class S>
double lipschitz_constant_estimate(const Kernel<S>& kernel, const TestFunction<S>& f, double t,
                                   const std::vector<std::pair<S, S>>& pairs, std::int64_t n,
                                   std::uint64_t seed, bool exact = false) {
    if (pairs.empty()) throw BadParameter("lipschitz_constant_estimate: no pairs");
    const std::int64_t steps = detail::step_count(kernel, t);
    auto smoothed = [&](const S& x, std::uint64_t stream_index) {
        if (exact) {
            return detail::point_marginal(kernel, x, steps).expectation(f.eval);
        }
        const auto cloud =
            marginal_sample(kernel, x, t, n, RngStream::derive_key(seed, stream_index));
        std::vector<double> vals(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) vals[i] = f.eval(cloud.samples()[i]);
        return mean(vals);
    };
    double best = 0.0;
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const double d0 = kernel.space.dist(pairs[idx].first, pairs[idx].second);
        if (d0 == 0.0) throw DegeneratePair("lipschitz_constant_estimate: d(x,y) = 0");
        if (!exact && n < 1) throw BadParameter("lipschitz_constant_estimate: n must be >= 1");
        const double fx = smoothed(pairs[idx].first, 2 * idx);
        const double fy = smoothed(pairs[idx].second, 2 * idx + 1);
        best = std::max(best, std::abs(fx - fy) / d0);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Invariance and the second-moment gap
// ---------------------------------------------------------------------------

// Weak-sense invariance defect: max over the handed test functions of
// |E_{pi_hat}[P_t f] - pi_hat(f)|. Monte Carlo mode starts each replicate
// from a pi_hat draw; exact mode composes pi_hat with the exact pushforward
// (and is exactly 0 at t = 0). half_width belongs to the maximizing f.
template <class S>
Estimate invariance_check(const Kernel<S>& kernel, const DiscreteMeasure<S>& pi_hat,
                          const std::vector<TestFunction<S>>& fns, double t, std::int64_t n,
                          std::uint64_t seed, bool exact = false) {
    if (fns.empty()) throw BadParameter("invariance_check: no test functions");
    const std::int64_t steps = detail::step_count(kernel, t);
    Estimate best;
    for (std::size_t f_idx = 0; f_idx < fns.size(); ++f_idx) {
        const auto& f = fns[f_idx];
        double gap = 0.0, hw = 0.0;
        if (exact) {
            const double smoothed = pi_hat.expectation([&](const S& a) {
                return detail::point_marginal(kernel, a, steps).expectation(f.eval);
            });
            gap = std::abs(smoothed - pi_hat.expectation(f.eval));
        } else {
            if (n < 2) throw BadParameter("invariance_check: n must be >= 2");
            const auto cloud = marginal_sample(kernel, pi_hat, t, n,
                                               RngStream::derive_key(seed, f_idx));
            std::vector<double> vals(cloud.size());
            for (std::size_t i = 0; i < cloud.size(); ++i) vals[i] = f.eval(cloud.samples()[i]);
            gap = std::abs(mean(vals) - pi_hat.expectation(f.eval));
            hw = mean_half_width_95(vals);
        }
        if (f_idx == 0 || gap > best.value) best = {gap, hw};
    }
    return best;
}

// Monte Carlo E^x[(A_t f)^2] - pi_ref^2 with its half-width; tends to 0
// exactly when the time average converges to pi_ref in mean square.
template <class S>
Estimate second_moment_gap(const Kernel<S>& kernel, const S& x0, const TestFunction<S>& f,
                           double pi_ref, double t, std::int64_t n_traj, std::uint64_t seed) {
    if (n_traj < 2) throw BadParameter("second_moment_gap: need at least 2 trajectories");
    const std::int64_t steps = detail::window_steps(kernel, t);
    std::vector<double> sq(static_cast<std::size_t>(n_traj));
    parallel_for_indexed(static_cast<std::size_t>(n_traj), [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        double sum = 0.0;
        detail::walk_window(kernel, x0, steps, f, rng, [&](double v) { sum += v; });
        const double avg = sum / static_cast<double>(steps);
        sq[i] = avg * avg;
    });
    return {mean(sq) - pi_ref * pi_ref, mean_half_width_95(sq)};
}

// ---------------------------------------------------------------------------
// Synchronous coupling and the empirical-bias allowance
// ---------------------------------------------------------------------------

// Mean coupled distance E[d(X_t, Y_t)] across t_grid, where X and Y start
// from x1 and x2 and consume the same randomness — an upper bound on
// W1(law X_t, law Y_t) per the coupling characterization.
template <class S>
ConvergenceCurve coupling_curve(const Kernel<S>& kernel, const S& x1, const S& x2,
                                const std::vector<double>& t_grid, std::int64_t n,
                                std::uint64_t seed) {
    if (t_grid.empty()) throw BadGrid("coupling_curve: empty t grid");
    if (n < 2) throw BadParameter("coupling_curve: n must be >= 2");
    std::vector<std::int64_t> checkpoints(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        checkpoints[j] = detail::step_count(kernel, t_grid[j]);
        if (j > 0 && checkpoints[j] <= checkpoints[j - 1]) {
            throw BadGrid("coupling_curve: t grid must be strictly increasing");
        }
    }
    const std::size_t n_grid = t_grid.size();
    const auto nn = static_cast<std::size_t>(n);
    std::vector<double> dists(n_grid * nn);
    parallel_for_indexed(nn, [&](std::size_t i) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(i));
        S a = x1;
        S b = x2;
        std::int64_t count = 0;
        std::size_t next = 0;
        while (next < n_grid && count == checkpoints[next]) {
            dists[next++ * nn + i] = kernel.space.dist(a, b);
        }
        while (next < n_grid) {
            RngStream twin = rng;  // same draws for both copies
            a = kernel.step(a, rng);
            b = kernel.step(b, twin);
            ++count;
            while (next < n_grid && count == checkpoints[next]) {
                dists[next++ * nn + i] = kernel.space.dist(a, b);
            }
        }
    });
    ConvergenceCurve curve;
    for (std::size_t j = 0; j < n_grid; ++j) {
        const auto slice = std::span<const double>(dists).subspan(j * nn, nn);
        curve.append(t_grid[j], mean(slice), mean_half_width_95(slice), n);
    }
    return curve;
}

// W1 between two independent n-sample draws of the same law: the data-driven
// additive allowance for the upward bias of empirical-measure Wasserstein
// estimates at sample size n.
template <class S>
double self_distance_bias(const MetricSpace<S>& space, const DiscreteMeasure<S>& law,
                          std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw BadParameter("self_distance_bias: n must be >= 1");
    auto draw = [&](std::uint64_t which) {
        RngStream rng = RngStream::substream(seed, which);
        std::vector<S> cloud;
        cloud.reserve(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
            cloud.push_back(law.atoms()[detail::draw_categorical(law.weights(), rng)]);
        }
        return EmpiricalMeasure<S>(std::move(cloud)).to_discrete();
    };
    return w1_auto(draw(0), draw(1), space);
}

}  // namespace ergolab
