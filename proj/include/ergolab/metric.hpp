#pragma once

#include <algorithm>
#include <functional>
#include <utility>

namespace ergolab {

template <class P>
using MetricFn = std::function<double(const P&, const P&)>;

enum class TruncationMode { Min1, Ratio };

// Bounded-by-1 reduction of a metric: 1 ∧ d (Min1) or d/(1+d) (Ratio). Both
// are again metrics and induce the same topology; Min1 is the default used
// throughout because it leaves small distances unchanged.
template <class P>
MetricFn<P> truncate_metric(MetricFn<P> dist, TruncationMode mode = TruncationMode::Min1) {
    if (mode == TruncationMode::Min1) {
        return [d = std::move(dist)](const P& x, const P& y) { return std::min(1.0, d(x, y)); };
    }
    return [d = std::move(dist)](const P& x, const P& y) {
        const double v = d(x, y);
        return v / (1.0 + v);
    };
}

// A point domain together with a symmetric distance bounded by 1.
//
// abs_diff_1d marks spaces whose metric is |x-y| possibly truncated at 1; on
// those the closed-form 1D Wasserstein routine applies whenever the support
// has diameter <= 1.
template <class P>
struct MetricSpace {
    MetricFn<P> dist;
    bool abs_diff_1d = false;
};

// [0,1]-type interval with metric |x-y| (diameter assumed <= 1, no
// truncation needed).
inline MetricSpace<double> interval_space() {
    return {[](double x, double y) { return std::abs(x - y); }, true};
}

// Real line with metric 1 ∧ |x-y|.
inline MetricSpace<double> real_line_space() {
    return {[](double x, double y) { return std::min(1.0, std::abs(x - y)); }, true};
}

}  // namespace ergolab
