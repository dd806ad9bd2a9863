#include "ergolab/ergodic.hpp"

#include <cmath>

#include "ergolab/csv.hpp"

namespace ergolab {

void ConvergenceCurve::append(double t, double value, double half_width,
                              std::int64_t n_samples) {
    if (!entries.empty() && !(t > entries.back().t)) {
        throw BadGrid("ConvergenceCurve: t must be strictly increasing");
    }
    if (half_width < 0.0) throw BadParameter("ConvergenceCurve: negative half-width");
    entries.push_back({t, value, half_width, n_samples});
}

std::string ConvergenceCurve::to_csv() const {
    std::string out = "t,value,half_width,n\n";
    for (const CurveEntry& e : entries) {
        out += format_double(e.t);
        out += ',';
        out += format_double(e.value);
        out += ',';
        out += format_double(e.half_width);
        out += ',';
        out += format_int(e.n_samples);
        out += '\n';
    }
    return out;
}

std::string RateFit::to_csv() const {
    std::string out = "C,c,residual,window_lo,window_hi\n";
    out += format_double(C);
    out += ',';
    out += format_double(c);
    out += ',';
    out += format_double(residual);
    out += ',';
    out += format_double(window_lo);
    out += ',';
    out += format_double(window_hi);
    out += '\n';
    return out;
}

RateFit rate_fit(const ConvergenceCurve& curve, double window_lo, double window_hi) {
    std::vector<double> ts;
    std::vector<double> logs;
    for (const CurveEntry& e : curve.entries) {
        if (e.t < window_lo || e.t > window_hi) continue;
        if (!(e.value > 0.0)) {
            throw NonPositiveValue("rate_fit: nonpositive value at t = " + format_double(e.t) +
                                   " inside the window");
        }
        ts.push_back(e.t);
        logs.push_back(std::log(e.value));
    }
    if (ts.size() < 3) throw BadParameter("rate_fit: fewer than 3 entries in the window");

    const double t_bar = mean(ts);
    const double l_bar = mean(logs);
    std::vector<double> cov(ts.size());
    std::vector<double> var(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cov[i] = (ts[i] - t_bar) * (logs[i] - l_bar);
        var[i] = (ts[i] - t_bar) * (ts[i] - t_bar);
    }
    const double denom = kahan_sum(var);
    if (denom == 0.0) throw BadParameter("rate_fit: degenerate window (single t)");
    const double slope = kahan_sum(cov) / denom;
    const double intercept = l_bar - slope * t_bar;

    std::vector<double> resid_sq(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = logs[i] - (intercept + slope * ts[i]);
        resid_sq[i] = r * r;
    }
    RateFit fit;
    fit.C = std::exp(intercept);
    fit.c = -slope;
    fit.residual = std::sqrt(mean(resid_sq));
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    return fit;
}

}  // namespace ergolab
