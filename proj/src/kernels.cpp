#include "ergolab/kernels.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "ergolab/numerics.hpp"
#include "ergolab/oracle.hpp"

namespace ergolab {

Kernel<double> dyadic_kernel() {
    Kernel<double> k;
    k.space = interval_space();
    k.step = [](const double& x, RngStream& rng) {
        const double shift = (rng.next_u64() >> 63) ? 0.5 : 0.0;
        return x / 2.0 + shift;
    };
    k.time_step = 1.0;
    k.continuous_time = false;
    k.exact_marginal = [](const double& x, int n) { return dyadic_exact_marginal(x, n); };
    return k;
}

DiscreteMeasure<double> dyadic_exact_marginal(double x, int n) {
    if (x < 0.0 || x > 1.0) throw BadParameter("dyadic_exact_marginal: x outside [0,1]");
    if (n < 0) throw BadParameter("dyadic_exact_marginal: n must be nonnegative");
    if (n > 30) throw CapExceeded("dyadic_exact_marginal: 2^n atoms exceed the cap (n > 30)");
    if (n == 0) return DiscreteMeasure<double>::dirac(x);
    const std::int64_t count = std::int64_t{1} << n;
    const double scale = std::ldexp(1.0, -n);  // 2^-n, exact
    std::vector<double> atoms(static_cast<std::size_t>(count));
    const double base = x * scale;
    for (std::int64_t j = 0; j < count; ++j) {
        atoms[static_cast<std::size_t>(j)] = base + static_cast<double>(j) * scale;
    }
    std::vector<double> weights(static_cast<std::size_t>(count), scale);
    return DiscreteMeasure<double>(std::move(atoms), std::move(weights));
}

Kernel<int> finite_kernel(const std::vector<std::vector<double>>& P,
                          std::vector<std::string> labels,
                          const std::vector<std::vector<double>>& dist) {
    const std::size_t k = P.size();
    if (k == 0) throw NotStochastic("finite_kernel: empty matrix");
    for (std::size_t i = 0; i < k; ++i) {
        if (P[i].size() != k) throw NotStochastic("finite_kernel: matrix is not square");
        for (double p : P[i]) {
            if (!(p >= 0.0)) throw NotStochastic("finite_kernel: negative entry");
        }
        if (std::abs(kahan_sum(P[i]) - 1.0) > 1e-12) {
            throw NotStochastic("finite_kernel: row does not sum to 1");
        }
    }
    if (dist.size() != k) throw BadParameter("finite_kernel: dist size mismatch");
    for (const auto& row : dist) {
        if (row.size() != k) throw BadParameter("finite_kernel: dist size mismatch");
        for (double d : row) {
            if (!(d >= 0.0 && d <= 1.0)) throw BadParameter("finite_kernel: dist not in [0,1]");
        }
    }
    if (labels.empty()) {
        labels.resize(k);
        for (std::size_t i = 0; i < k; ++i) labels[i] = "s" + std::to_string(i);
    }
    if (labels.size() != k) throw BadParameter("finite_kernel: label count mismatch");

    auto matrix = std::make_shared<std::vector<std::vector<double>>>(P);
    auto metric = std::make_shared<std::vector<std::vector<double>>>(dist);

    Kernel<int> kernel;
    kernel.space.dist = [metric](const int& a, const int& b) {
        return (*metric)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };
    kernel.space.abs_diff_1d = false;
    kernel.step = [matrix](const int& x, RngStream& rng) {
        const auto& row = (*matrix)[static_cast<std::size_t>(x)];
        return static_cast<int>(detail::draw_categorical(row, rng));
    };
    kernel.time_step = 1.0;
    kernel.continuous_time = false;
    kernel.exact_marginal = [matrix, k](const int& x, int n) {
        std::vector<double> row = matrix_power_row(*matrix, x, n);
        std::vector<int> atoms(k);
        for (std::size_t i = 0; i < k; ++i) atoms[i] = static_cast<int>(i);
        return DiscreteMeasure<int>(std::move(atoms), std::move(row));
    };
    kernel.labels = std::move(labels);
    return kernel;
}

Kernel<double> ar1_kernel(double rho, double sigma) {
    if (!(rho > 0.0 && rho < 1.0)) throw BadParameter("ar1_kernel: rho must lie in (0,1)");
    if (!(sigma > 0.0)) throw BadParameter("ar1_kernel: sigma must be positive");
    Kernel<double> k;
    k.space = real_line_space();
    k.step = [rho, sigma](const double& x, RngStream& rng) {
        return rho * x + sigma * rng.next_gaussian();
    };
    k.time_step = 1.0;
    k.continuous_time = false;
    return k;
}

double default_delay_diffusion(double u) { return 1.0 + 0.5 * std::tanh(u); }

Kernel<PathSegment> delay_sde_kernel(std::function<double(double)> G, double dt,
                                     double delta, bool check_diffusion) {
    if (!(dt > 0.0)) throw BadParameter("delay_sde_kernel: dt must be positive");
    if (!(delta > 0.0)) throw BadParameter("delay_sde_kernel: delta must be positive");
    const auto nodes_per_unit = static_cast<std::int64_t>(std::llround(1.0 / dt));
    if (nodes_per_unit < 1 || std::abs(static_cast<double>(nodes_per_unit) * dt - 1.0) > 1e-12) {
        throw BadGrid("delay_sde_kernel: dt must divide 1 exactly");
    }
    if (check_diffusion) {
        // Sample G on a grid wide enough to cover the reachable range and
        // verify strict positivity and monotonicity within tolerance.
        double prev = 0.0;
        for (int i = 0; i <= 120; ++i) {
            const double u = -6.0 + static_cast<double>(i) * 0.1;
            const double g = G(u);
            if (g < 1e-9) throw BadDiffusion("delay_sde_kernel: G not strictly positive");
            if (i > 0 && g < prev - 1e-9) {
                throw BadDiffusion("delay_sde_kernel: G not increasing");
            }
            prev = g;
        }
    }
    const std::size_t grid_nodes = static_cast<std::size_t>(nodes_per_unit) + 1;
    const double root_dt = std::sqrt(dt);

    Kernel<PathSegment> k;
    k.space.dist = [delta, grid_nodes](const PathSegment& a, const PathSegment& b) {
        if (a.values.size() != grid_nodes || b.values.size() != grid_nodes) {
            throw BadGrid("delay metric: segment grid does not match the kernel mesh");
        }
        return std::min(1.0, path_sup_distance(a, b) / delta);
    };
    k.space.abs_diff_1d = false;
    k.step = [G, dt, root_dt, grid_nodes](const PathSegment& x, RngStream& rng) {
        if (x.values.size() != grid_nodes) {
            throw BadGrid("delay step: segment grid does not match the kernel mesh");
        }
        const double v = x.head();
        const double z = rng.next_gaussian();
        const double fresh = v - v * dt + G(x.delayed()) * root_dt * z;
        PathSegment out;
        out.values.assign(x.values.begin() + 1, x.values.end());
        out.values.push_back(fresh);
        return out;
    };
    k.time_step = dt;
    k.continuous_time = true;
    return k;
}

}  // namespace ergolab
