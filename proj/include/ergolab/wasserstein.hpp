#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/lp.hpp"
#include "ergolab/measure.hpp"
#include "ergolab/metric.hpp"
#include "ergolab/transport.hpp"

namespace ergolab {

namespace detail {

// Union support of two canonicalized (sorted, distinct-atom) measures with
// the signed weight difference mu - nu per union atom.
template <class P>
void union_support(const DiscreteMeasure<P>& mu, const DiscreteMeasure<P>& nu,
                   std::vector<P>& atoms, std::vector<double>& signed_mass) {
    atoms.clear();
    signed_mass.clear();
    std::size_t i = 0, j = 0;
    const auto& xa = mu.atoms();
    const auto& xb = nu.atoms();
    while (i < xa.size() || j < xb.size()) {
        if (j == xb.size() || (i < xa.size() && xa[i] < xb[j])) {
            atoms.push_back(xa[i]);
            signed_mass.push_back(mu.weights()[i]);
            ++i;
        } else if (i == xa.size() || xb[j] < xa[i]) {
            atoms.push_back(xb[j]);
            signed_mass.push_back(-nu.weights()[j]);
            ++j;
        } else {
            atoms.push_back(xa[i]);
            signed_mass.push_back(mu.weights()[i] - nu.weights()[j]);
            ++i;
            ++j;
        }
    }
}

}  // namespace detail

// Exact Wasserstein-1 distance between measures on a real interval of
// diameter <= 1, where the metric is |x-y|: the closed-form integral of the
// CDF difference over the merged support. Throws AtomOutOfRange when the
// combined support spans more than 1 (the truncation would bite; use
// w1_exact instead).
inline double w1_1d(const DiscreteMeasure<double>& mu, const DiscreteMeasure<double>& nu) {
    const double lo = std::min(mu.atoms().front(), nu.atoms().front());
    const double hi = std::max(mu.atoms().back(), nu.atoms().back());
    if (hi - lo > 1.0) {
        throw AtomOutOfRange("w1_1d: support diameter exceeds 1");
    }
    double sum = 0.0, comp = 0.0;   // compensated accumulation
    double cdf_gap = 0.0;           // F_mu - F_nu left of the walk point
    double prev = lo;
    std::size_t i = 0, j = 0;
    const auto& xa = mu.atoms();
    const auto& xb = nu.atoms();
    while (i < xa.size() || j < xb.size()) {
        double u;
        if (j == xb.size() || (i < xa.size() && xa[i] <= xb[j])) {
            u = xa[i];
        } else {
            u = xb[j];
        }
        const double term = std::abs(cdf_gap) * (u - prev);
        const double t = sum + term;
        comp += (std::abs(sum) >= term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        prev = u;
        while (i < xa.size() && xa[i] == u) cdf_gap += mu.weights()[i++];
        while (j < xb.size() && xb[j] == u) cdf_gap -= nu.weights()[j++];
    }
    return sum + comp;
}

// Exact Wasserstein-1 via the primal transportation problem on the product
// of the supports. The arguments are put in a canonical order first so the
// returned value is bitwise symmetric in (mu, nu).
template <class P>
std::pair<double, TransportPlan> w1_exact(const DiscreteMeasure<P>& mu,
                                          const DiscreteMeasure<P>& nu,
                                          const MetricSpace<P>& space) {
    const bool swapped = nu < mu;
    const DiscreteMeasure<P>& a = swapped ? nu : mu;
    const DiscreteMeasure<P>& b = swapped ? mu : nu;

    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(b.size());
    CostMatrix cost(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            cost.at(i, j) = space.dist(a.atoms()[i], b.atoms()[j]);
        }
    }
    TransportPlan plan = solve_transport(a.weights(), b.weights(), cost);
    if (swapped) {
        for (auto& e : plan.entries) std::swap(e.from, e.to);
        std::sort(plan.entries.begin(), plan.entries.end(),
                  [](const PlanEntry& x, const PlanEntry& y) {
                      return x.from != y.from ? x.from < y.from : x.to < y.to;
                  });
    }
    return {plan.objective, std::move(plan)};
}

template <class P>
struct DualPotential {
    double value = 0.0;
    std::vector<P> support;          // joint support (union of atoms)
    std::vector<double> potential;   // 1-Lipschitz potential per support atom
};

// Wasserstein-1 via the Kantorovich-Rubinstein dual: best 1-Lipschitz
// potential on the joint support, solved as a dense LP. Serves as the
// independent certificate for w1_exact (strong duality).
template <class P>
DualPotential<P> w1_dual(const DiscreteMeasure<P>& mu, const DiscreteMeasure<P>& nu,
                         const MetricSpace<P>& space) {
    DualPotential<P> out;
    std::vector<double> signed_mass;
    detail::union_support(mu, nu, out.support, signed_mass);
    const int k = static_cast<int>(out.support.size());
    CostMatrix dist(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double d = space.dist(out.support[i], out.support[j]);
            dist.at(i, j) = d;
            dist.at(j, i) = d;
        }
    }
    DualSolution sol = solve_kr_dual(signed_mass, dist);
    out.value = sol.value;
    out.potential = std::move(sol.potential);
    return out;
}

// Total variation distance: half the l1 gap over the union of supports.
template <class P>
double tv_discrete(const DiscreteMeasure<P>& mu, const DiscreteMeasure<P>& nu) {
    std::vector<P> atoms;
    std::vector<double> signed_mass;
    detail::union_support(mu, nu, atoms, signed_mass);
    for (double& s : signed_mass) s = std::abs(s);
    return 0.5 * kahan_sum(signed_mass);
}

// Wasserstein-1 with the cheapest applicable exact route: the closed-form 1D
// integral when the metric is |x-y| (possibly truncated) and the combined
// support has diameter <= 1, otherwise the transportation solver.
template <class P>
double w1_auto(const DiscreteMeasure<P>& mu, const DiscreteMeasure<P>& nu,
               const MetricSpace<P>& space) {
    if constexpr (std::is_same_v<P, double>) {
        if (space.abs_diff_1d) {
            const double lo = std::min(mu.atoms().front(), nu.atoms().front());
            const double hi = std::max(mu.atoms().back(), nu.atoms().back());
            if (hi - lo <= 1.0) return w1_1d(mu, nu);
        }
    }
    return w1_exact(mu, nu, space).first;
}

}  // namespace ergolab
