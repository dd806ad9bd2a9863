// Acceptance suite: ten independent criteria, one pass/fail line each.
//
//   acceptance            runs all ten
//   acceptance <k> ...    runs the listed criteria only
//
// Exit code 0 when every requested criterion passes, 1 otherwise. Each
// criterion returns an empty string on success or the failure reason.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/csv.hpp"
#include "ergolab/ergodic.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/oracle.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/scenario.hpp"
#include "ergolab/wasserstein.hpp"

using namespace ergolab;

namespace {

std::string fail(const std::string& reason) { return reason; }

std::string fmt(double x) { return format_double(x); }

DiscreteMeasure<double> lebesgue_midpoints(std::int64_t m) {
    std::vector<double> atoms(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        atoms[static_cast<std::size_t>(i)] =
            (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    }
    return DiscreteMeasure<double>(
        std::move(atoms),
        std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

FiniteChain two_state_chain() {
    return make_finite_chain({{0.7, 0.3}, {0.6, 0.4}}, {}, {{0.0, 1.0}, {1.0, 0.0}});
}

TestFunction<int> state_function() {
    return {[](const int& s) { return static_cast<double>(s); }, 1.0, 1.0, "f01"};
}

// --- 1: exact dyadic marginals approach Lebesgue at rate 2^-n ----------------

std::string criterion_1() {
    const auto reference = lebesgue_midpoints(1 << 16);
    for (const double x : {0.0, 0.37, 1.0}) {
        for (int n = 1; n <= 12; ++n) {
            const double value = w1_1d(dyadic_exact_marginal(x, n), reference);
            const double ceiling = std::pow(2.0, -n) + std::pow(2.0, -16);
            if (!(value <= ceiling)) {
                return fail("x=" + fmt(x) + " n=" + std::to_string(n) + ": W1=" + fmt(value) +
                            " > " + fmt(ceiling));
            }
        }
    }
    return {};
}

// --- 2: exact contraction factor equals 2^-n on random pairs -----------------

std::string criterion_2() {
    const Kernel<double> kernel = dyadic_kernel();
    RngStream rng(20260814);
    for (int pair = 0; pair < 100; ++pair) {
        double x1 = rng.next_uniform();
        double x2 = rng.next_uniform();
        while (x1 == x2) x2 = rng.next_uniform();
        for (int n = 1; n <= 8; ++n) {
            const double factor = contraction_factor(kernel, x1, x2, n, 0, 1, true);
            const double target = std::pow(2.0, -n);
            if (!(factor <= target + 1e-9)) {
                return fail("pair " + std::to_string(pair) + " n=" + std::to_string(n) +
                            ": factor=" + fmt(factor) + " > 2^-n + 1e-9");
            }
            if (!(std::abs(factor - target) <= 1e-9)) {
                return fail("pair " + std::to_string(pair) + " n=" + std::to_string(n) +
                            ": |factor - 2^-n| = " + fmt(std::abs(factor - target)) + " > 1e-9");
            }
        }
    }
    return {};
}

// --- 3: rate_fit recovers log 2 from the exact dyadic curve ------------------

std::string criterion_3() {
    const Kernel<double> kernel = dyadic_kernel();
    ConvergenceCurve curve;
    for (int n = 1; n <= 12; ++n) {
        curve.append(n, contraction_factor(kernel, 0.0, 1.0, n, 0, 1, true), 0.0, 1);
    }
    const RateFit fit = rate_fit(curve, 1, 12);
    const double ln2 = std::log(2.0);
    if (!(fit.c >= ln2 - 0.02 && fit.c <= ln2 + 0.02)) {
        return fail("c=" + fmt(fit.c) + " outside [ln2 - 0.02, ln2 + 0.02]");
    }
    if (!(fit.C >= 0.9 && fit.C <= 1.1)) {
        return fail("C=" + fmt(fit.C) + " outside [0.9, 1.1]");
    }
    return {};
}

// --- 4: Monte Carlo estimators match the path-enumeration oracle -------------

std::string criterion_4() {
    const FiniteChain chain = two_state_chain();
    const Kernel<int> kernel = finite_kernel(chain.P, chain.labels, chain.dist);
    const TestFunction<int> f = state_function();
    const std::vector<double> fvec{0.0, 1.0};
    const double pi_f = stationary_distribution(chain).expectation(f.eval);
    const std::int64_t n_traj = 100000;
    const std::vector<double> t_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    std::vector<std::vector<double>> exact_lp(2, std::vector<double>(10));
    std::vector<double> exact_sm(10);
    for (int t = 1; t <= 10; ++t) {
        exact_lp[0][static_cast<std::size_t>(t - 1)] = exact_lp_error(chain, 0, fvec, 1.0, t);
        exact_lp[1][static_cast<std::size_t>(t - 1)] = exact_lp_error(chain, 0, fvec, 2.0, t);
        exact_sm[static_cast<std::size_t>(t - 1)] = exact_second_moment(chain, 0, fvec, t);
    }

    int good_lp = 0;
    int good_sm = 0;
    for (int s = 0; s < 100; ++s) {
        const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(s);
        bool lp_ok = true;
        for (int pi = 0; pi < 2 && lp_ok; ++pi) {
            const double p = pi == 0 ? 1.0 : 2.0;
            const ConvergenceCurve prof =
                lp_error_profile(kernel, 0, f, p, t_grid, pi_f, n_traj, seed);
            for (std::size_t j = 0; j < prof.entries.size(); ++j) {
                const auto& e = prof.entries[j];
                if (std::abs(e.value - exact_lp[static_cast<std::size_t>(pi)][j]) >
                    3.0 * e.half_width) {
                    lp_ok = false;
                    break;
                }
            }
        }
        good_lp += lp_ok;
        bool sm_ok = true;
        for (int t = 1; t <= 10 && sm_ok; ++t) {
            const Estimate e = second_moment_gap(kernel, 0, f, pi_f, t, n_traj, seed);
            if (std::abs(e.value - exact_sm[static_cast<std::size_t>(t - 1)]) >
                3.0 * e.half_width) {
                sm_ok = false;
            }
        }
        good_sm += sm_ok;
    }
    if (good_lp < 99) {
        return fail("lp_error within 3 half-widths in only " + std::to_string(good_lp) +
                    "/100 seeds");
    }
    if (good_sm < 99) {
        return fail("second_moment_gap within 3 half-widths in only " + std::to_string(good_sm) +
                    "/100 seeds");
    }
    return {};
}

// --- 5: L2 Birkhoff error decays like t^{-1/2} on the dyadic chain -----------

std::string criterion_5() {
    const Kernel<double> kernel = dyadic_kernel();
    const TestFunction<double> f{[](const double& x) { return x; }, 1.0, 1.0, "x"};
    const ConvergenceCurve curve =
        lp_error_profile(kernel, 0.25, f, 2.0, {32, 128, 512, 2048}, 0.5, 10000, 314159);
    const double at32 = curve.entries[0].value;
    const double at2048 = curve.entries[3].value;
    if (!(at2048 <= at32 / 4.0)) {
        return fail("estimate(2048)=" + fmt(at2048) + " not below estimate(32)/4=" +
                    fmt(at32 / 4.0));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& e : curve.entries) {
        const double lx = std::log(e.t);
        const double ly = std::log(e.value);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(curve.entries.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (!(slope >= -0.65 && slope <= -0.35)) {
        return fail("log-log slope " + fmt(slope) + " outside [-0.65, -0.35]");
    }
    return {};
}

// --- 6: uniform-in-s marginal convergence with the empirical-bias allowance --

std::string criterion_6() {
    const Kernel<double> kernel = dyadic_kernel();
    const auto pi_hat = lebesgue_midpoints(2048);
    const std::vector<double> s_grid{0, 1, 2, 4, 8, 16};
    const double b = self_distance_bias(kernel.space, pi_hat, 2000, 727);
    for (int t = 1; t <= 10; ++t) {
        const Estimate e = uniform_condition(kernel, 0.0, pi_hat, t, s_grid, 2000, 2000,
                                             9000 + static_cast<std::uint64_t>(t));
        const double ceiling = std::pow(2.0, -t) + b + 3.0 * e.half_width;
        if (!(e.value <= ceiling)) {
            return fail("t=" + std::to_string(t) + ": estimate=" + fmt(e.value) + " > 2^-t + b" +
                        " + 3hw = " + fmt(ceiling) + " (b=" + fmt(b) + ")");
        }
    }
    return {};
}

// --- 7: invariance certification ----------------------------------------------

std::string criterion_7() {
    constexpr double kPi = 3.14159265358979323846;
    const Kernel<double> dyadic = dyadic_kernel();
    const std::vector<TestFunction<double>> fns{
        {[](const double& x) { return x; }, 1.0, 1.0, "x"},
        {[](const double& x) { return x * x; }, 2.0, 1.0, "x^2"},
        {[kPi](const double& x) { return std::cos(kPi * x); }, kPi, 1.0, "cos_pi"},
    };
    const Estimate leb = invariance_check(dyadic, lebesgue_midpoints(1 << 14), fns, 1, 0, 1, true);
    if (!(leb.value <= 5e-3)) {
        return fail("dyadic/Lebesgue gap " + fmt(leb.value) + " > 5e-3");
    }

    const std::vector<FiniteChain> chains{
        two_state_chain(),
        make_finite_chain({{0.5, 0.3, 0.2}, {0.2, 0.6, 0.2}, {0.3, 0.3, 0.4}}, {},
                          {{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 0.0}}),
    };
    const std::vector<TestFunction<int>> ffin{
        state_function(),
        {[](const int& s) { return s == 0 ? 1.0 : 0.0; }, 1.0, 1.0, "indicator0"},
    };
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const auto& chain = chains[c];
        const Kernel<int> kernel = finite_kernel(chain.P, chain.labels, chain.dist);
        const Estimate e = invariance_check(kernel, stationary_distribution(chain), ffin, 3,
                                            20000, 17 + static_cast<std::uint64_t>(c), false);
        if (!(e.value <= 3.0 * e.half_width)) {
            return fail("chain " + std::to_string(c) + ": gap " + fmt(e.value) + " > 3hw = " +
                        fmt(3.0 * e.half_width));
        }
    }
    return {};
}

// --- 8: delay equation, deterministic limit and coupled W1 decay -------------

std::string criterion_8() {
    for (const double dt : {1.0 / 32.0, 1.0 / 64.0}) {
        const auto kernel = delay_sde_kernel([](double) { return 0.0; }, dt, 1.0, false);
        const auto nodes = static_cast<int>(std::llround(1.0 / dt));
        const auto path = simulate(kernel, PathSegment::constant(1.0, nodes), 1.0, 1);
        const double endpoint = path.states.back().head();
        const double target = std::exp(-1.0);
        if (!(std::abs(endpoint - target) <= 2.0 * dt)) {
            return fail("dt=" + fmt(dt) + ": endpoint " + fmt(endpoint) + " vs e^-1 " +
                        fmt(target) + " differ by more than 2dt");
        }
    }

    const auto kernel = delay_sde_kernel(default_delay_diffusion, 1.0 / 64.0, 1.0);
    const ConvergenceCurve curve =
        coupling_curve(kernel, PathSegment::constant(0.0, 64), PathSegment::constant(1.0, 64),
                       {1, 2, 4, 8}, 2000, 42);
    for (std::size_t j = 0; j + 1 < curve.entries.size(); ++j) {
        const auto& a = curve.entries[j];
        const auto& b = curve.entries[j + 1];
        if (!(b.value + b.half_width < a.value - a.half_width)) {
            return fail("coupling curve not decreasing between t=" + fmt(a.t) + " and t=" +
                        fmt(b.t) + " after half-widths");
        }
    }
    const RateFit fit = rate_fit(curve, 1, 8);
    if (!(fit.c > 0.0)) return fail("fitted coupling rate c=" + fmt(fit.c) + " not positive");
    return {};
}

// --- 9: transport solver cross-checks on random instances --------------------

// Random measure with <= 8 atoms; weights are multiples of 2^-12, so every
// downstream sum and difference is exact in double precision.
DiscreteMeasure<double> random_measure(RngStream& rng, const std::vector<double>& atom_pool) {
    const int k = 1 + static_cast<int>(rng.next_uniform() * 8.0);
    std::vector<double> atoms(static_cast<std::size_t>(k));
    for (auto& a : atoms) {
        a = atom_pool.empty()
                ? rng.next_uniform()
                : atom_pool[static_cast<std::size_t>(rng.next_uniform() *
                                                     static_cast<double>(atom_pool.size()))];
    }
    std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
    constexpr int kQuanta = 4096;
    for (int q = 0; q < kQuanta; ++q) {
        weights[static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(k))] +=
            1.0 / kQuanta;
    }
    // Zero-weight atoms are dropped by the constructor; guard the all-on-one case.
    return DiscreteMeasure<double>(std::move(atoms), std::move(weights));
}

std::string criterion_9() {
    const MetricSpace<double> space = interval_space();
    MetricSpace<double> discrete;
    discrete.dist = [](const double& x, const double& y) { return x == y ? 0.0 : 1.0; };
    discrete.abs_diff_1d = false;
    std::vector<double> pool(8);
    for (int j = 0; j < 8; ++j) pool[static_cast<std::size_t>(j)] = j / 8.0;

    RngStream rng(550);
    for (int i = 0; i < 1000; ++i) {
        const auto mu = random_measure(rng, {});
        const auto nu = random_measure(rng, {});
        const double primal = w1_exact(mu, nu, space).first;
        const double dual = w1_dual(mu, nu, space).value;
        if (!(std::abs(primal - dual) <= 1e-7)) {
            return fail("instance " + std::to_string(i) + ": primal-dual gap " +
                        fmt(std::abs(primal - dual)) + " > 1e-7");
        }
        if (!(std::abs(primal - w1_1d(mu, nu)) <= 1e-9)) {
            return fail("instance " + std::to_string(i) + ": 1D closed form vs simplex gap " +
                        fmt(std::abs(primal - w1_1d(mu, nu))) + " > 1e-9");
        }
        const auto dmu = random_measure(rng, pool);
        const auto dnu = random_measure(rng, pool);
        const double collapse = w1_exact(dmu, dnu, discrete).first;
        const double tv = tv_discrete(dmu, dnu);
        if (collapse != tv) {
            return fail("instance " + std::to_string(i) + ": discrete-metric W1 " +
                        fmt(collapse) + " != TV " + fmt(tv));
        }
    }
    return {};
}

// --- 10: determinism of the scenario pipeline --------------------------------

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<double> csv_numbers(const std::string& text) {
    std::vector<double> out;
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    int line_no = 1;
    while (std::getline(lines, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            out.push_back(parse_double_field(field, line_no));
        }
    }
    return out;
}

std::string criterion_10() {
    namespace fs = std::filesystem;
    const fs::path scratch = "acceptance_scratch";
    fs::remove_all(scratch);
    auto config_for = [&](const std::string& dir) {
        return std::string(R"({
            "name": "oracle_equivalence",
            "kernel": {"name": "finite", "matrix": [[0.7, 0.3], [0.6, 0.4]],
                       "dist": [[0, 1], [1, 0]]},
            "initial": 0,
            "test_functions": ["state"],
            "estimator": {"name": "lp_error", "p": 1,
                          "t_grid": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
                          "pi_ref": "stationary", "n": 100000, "seed": 5000},
            "output": ")") +
               dir + "\"}";
    };
    run_scenario(config_for("acceptance_scratch/a"));
    run_scenario(config_for("acceptance_scratch/b"));
    const std::string curve_a = read_file(scratch / "a" / "oracle_equivalence_curve.csv");
    const std::string curve_b = read_file(scratch / "b" / "oracle_equivalence_curve.csv");
    if (curve_a.empty()) return fail("first run produced no curve CSV");
    if (curve_a != curve_b) return fail("same-seed reruns differ at the byte level");

    set_worker_count(3);
    run_scenario(config_for("acceptance_scratch/c"));
    set_worker_count(0);
    const std::string curve_c = read_file(scratch / "c" / "oracle_equivalence_curve.csv");
    const auto xs = csv_numbers(curve_a);
    const auto ys = csv_numbers(curve_c);
    if (xs.size() != ys.size() || xs.empty()) {
        return fail("worker-count run produced a different row count");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(std::abs(xs[i] - ys[i]) <= 1e-12)) {
            return fail("worker-count change moved a value by " +
                        fmt(std::abs(xs[i] - ys[i])) + " > 1e-12");
        }
    }
    return {};
}

struct Criterion {
    const char* label;
    std::string (*run)();
};

const Criterion kCriteria[] = {
    {"dyadic marginal W1 <= 2^-n + 2^-16 (n=1..12, x in {0, 0.37, 1})", criterion_1},
    {"exact dyadic contraction factor = 2^-n within 1e-9 on 100 random pairs", criterion_2},
    {"rate_fit on the exact dyadic curve: c in ln2 +- 0.02, C in [0.9, 1.1]", criterion_3},
    {"lp_error and second_moment_gap match the enumeration oracle (>=99/100 seeds)",
     criterion_4},
    {"L2 Birkhoff error: estimate(2048) <= estimate(32)/4 and slope in [-0.65, -0.35]",
     criterion_5},
    {"uniform condition estimate <= 2^-t + bias allowance + 3 half-widths (t=1..10)",
     criterion_6},
    {"invariance gaps: dyadic/Lebesgue <= 5e-3, finite chains <= 3 half-widths",
     criterion_7},
    {"delay equation: Euler endpoint near e^-1; coupled W1 decreasing with c > 0",
     criterion_8},
    {"solver cross-checks on 1000 instances: duality, 1D form, TV collapse", criterion_9},
    {"byte-identical reruns; worker count moves nothing beyond 1e-12", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int a = 1; a < argc; ++a) {
        const int k = std::atoi(argv[a]);
        if (k < 1 || k > 10) {
            std::fprintf(stderr, "usage: %s [criterion 1..10]...\n", argv[0]);
            return 1;
        }
        wanted.push_back(k);
    }
    if (wanted.empty()) {
        for (int k = 1; k <= 10; ++k) wanted.push_back(k);
    }

    bool all_ok = true;
    for (const int k : wanted) {
        const auto& crit = kCriteria[k - 1];
        const auto start = std::chrono::steady_clock::now();
        std::string reason;
        try {
            reason = crit.run();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (reason.empty()) {
            std::printf("criterion %2d: PASS  (%.1fs)  %s\n", k, secs, crit.label);
        } else {
            std::printf("criterion %2d: FAIL  (%.1fs)  %s -- %s\n", k, secs, crit.label,
                        reason.c_str());
            all_ok = false;
        }
        std::fflush(stdout);
    }
    return all_ok ? 0 : 1;
}
