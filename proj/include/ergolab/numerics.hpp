#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ergolab {

// Compensated (Kahan-Babuska) summation. Summation order is the order of
// the input span, so reductions over pre-filled per-item slots give the
// same result no matter how many workers produced the slots.
inline double kahan_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return kahan_sum(xs) / static_cast<double>(xs.size());
}

// Unbiased sample variance (n-1 denominator); 0 for fewer than two items.
inline double sample_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean(xs);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - m;
        sq[i] = d * d;
    }
    return kahan_sum(sq) / static_cast<double>(n - 1);
}

// Two-sided 95% standard-normal critical value.
inline constexpr double kZ95 = 1.959963984540054;

// 95% normal-approximation confidence half-width of the sample mean.
inline double mean_half_width_95(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    return kZ95 * std::sqrt(sample_variance(xs) / static_cast<double>(n));
}

double standard_normal_cdf(double x);

// Inverse standard normal CDF for p in (0,1). Bisection bracket plus Newton
// polish on std::erf; accurate to ~1e-15 over the usable double range.
double standard_normal_quantile(double p);

}  // namespace ergolab
