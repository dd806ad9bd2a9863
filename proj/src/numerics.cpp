#include "ergolab/numerics.hpp"

#include <cmath>

#include "ergolab/errors.hpp"

namespace ergolab {

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double standard_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw BadParameter("standard_normal_quantile: p must lie in (0,1)");
    }
    // Bisection on a bracket wide enough for all p representable as double.
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (standard_normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    // Newton polish; the density is strictly positive so steps are well posed.
    for (int i = 0; i < 4; ++i) {
        const double err = standard_normal_cdf(x) - p;
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;
        const double step = err / pdf;
        if (!std::isfinite(step)) break;
        x -= step;
    }
    return x;
}

}  // namespace ergolab
