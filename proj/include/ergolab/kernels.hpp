#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ergolab/kernel.hpp"

namespace ergolab {

// The dyadic chain on [0,1]: x -> x/2 + X with X uniform on {0, 1/2}.
// Metric |x-y| (diameter 1, no truncation needed); exact pushforward present.
Kernel<double> dyadic_kernel();

// Exact n-step law of the dyadic chain from x: the uniform measure on
// {x/2^n + j/2^n : j = 0..2^n - 1}. n = 0 gives the point mass at x.
DiscreteMeasure<double> dyadic_exact_marginal(double x, int n);

// A finite-state chain over labelled states, metric given as a matrix
// bounded by 1. Exact pushforward is the matrix-power row.
Kernel<int> finite_kernel(const std::vector<std::vector<double>>& P,
                          std::vector<std::string> labels,
                          const std::vector<std::vector<double>>& dist);

// Gaussian autoregression x -> rho*x + sigma*Z on the real line with metric
// 1 and |x-y|; stationary law N(0, sigma^2/(1-rho^2)).
Kernel<double> ar1_kernel(double rho, double sigma);

// Default diffusion coefficient for the delay equation: bounded in
// [1/2, 3/2], Lipschitz, strictly positive, strictly increasing.
double default_delay_diffusion(double u);

// Euler-Maruyama kernel for the delay equation dM = -M dt + G(M_{t-1}) dB.
// State is a PathSegment on [-1,0] with mesh dt; one step appends
// v - v*dt + G(delayed)*sqrt(dt)*Z and slides the window by one node.
// The metric is 1 and |x-y|_inf/delta on matching grids.
Kernel<PathSegment> delay_sde_kernel(std::function<double(double)> G = default_delay_diffusion,
                                     double dt = 1.0 / 64.0, double delta = 1.0,
                                     bool check_diffusion = true);

}  // namespace ergolab
