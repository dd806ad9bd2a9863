#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/scenario.hpp"

using namespace ergolab;

namespace {

std::string config_error_of(const std::string& text) {
    try {
        run_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "(no ConfigError)";
}

bool mentions(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("list_components names every registered component") {
    const std::string listing = list_components(default_registry());
    for (const char* name :
         {"dyadic", "finite", "ar1", "delay_sde", "lp_error", "marginal_convergence",
          "uniform_condition", "contraction", "lipschitz", "invariance", "second_moment",
          "rate_fit", "kernels", "estimators", "test functions"}) {
        CAPTURE(name);
        CHECK(mentions(listing, name));
    }
    CHECK(list_components(Registry{}) == "");
}

TEST_CASE("config validation names the offending field") {
    CHECK(mentions(config_error_of("{nope"), "config:"));
    CHECK(mentions(config_error_of("[1,2]"), "expected an object"));
    CHECK(mentions(config_error_of(R"({"bogus": 1})"), "config.bogus: unknown key"));
    CHECK(mentions(config_error_of(R"({"estimator": {"name": "lp_error", "seed": 1}})"),
                   "config.kernel: missing"));
    CHECK(mentions(config_error_of(R"({"kernel": {"name": "levy"},
                                       "estimator": {"name": "lp_error", "seed": 1}})"),
                   "config.kernel.name: unknown kernel 'levy'"));
    CHECK(mentions(config_error_of(R"({"kernel": {"name": "dyadic"}})"),
                   "config.estimator: missing"));
    CHECK(mentions(config_error_of(R"({"kernel": {"name": "dyadic"},
                                       "estimator": {"name": "warp", "seed": 1}})"),
                   "config.estimator.name: unknown estimator 'warp'"));

    const std::string no_seed = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0, "test_functions": ["x"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [1], "pi_ref": 0.5, "n": 10}
    })";
    CHECK(mentions(config_error_of(no_seed), "config.estimator.seed: missing"));

    const std::string stray_key = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0, "test_functions": ["x"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [1], "pi_ref": 0.5,
                      "n": 10, "seed": 1, "bogus": 2}
    })";
    CHECK(mentions(config_error_of(stray_key), "config.estimator.bogus: unknown key"));

    const std::string bad_fn = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0, "test_functions": ["nope"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [1], "pi_ref": 0.5,
                      "n": 10, "seed": 1}
    })";
    CHECK(mentions(config_error_of(bad_fn), "config.test_functions"));
    CHECK(mentions(config_error_of(bad_fn), "nope"));

    const std::string no_initial = R"({
        "kernel": {"name": "dyadic"}, "test_functions": ["x"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [1], "pi_ref": 0.5,
                      "n": 10, "seed": 1}
    })";
    CHECK(mentions(config_error_of(no_initial), "config.initial: missing"));

    const std::string bound_clash = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0, "test_functions": ["x"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [1], "pi_ref": 0.5,
                      "n": 10, "seed": 1},
        "bounds": {"ceiling": 1.0, "constant": 1.0, "rate": 1.0}
    })";
    CHECK(mentions(config_error_of(bound_clash), "config.bounds"));
    CHECK(mentions(config_error_of(bound_clash), "exactly one"));

    const std::string exact_with_n = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0,
        "estimator": {"name": "marginal_convergence", "t_grid": [1], "exact": true,
                      "n": 10, "pi": {"name": "lebesgue", "atoms": 8}, "seed": 1}
    })";
    CHECK(mentions(config_error_of(exact_with_n), "config.estimator.n: not used in exact mode"));

    const std::string bad_pi = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0,
        "estimator": {"name": "marginal_convergence", "t_grid": [1], "n": 10,
                      "pi": {"name": "cantor"}, "seed": 1}
    })";
    CHECK(mentions(config_error_of(bad_pi), "config.estimator.pi.name"));
}

TEST_CASE("dyadic exact marginal scenario passes every grid point") {
    const std::string cfg = R"({
        "name": "dyadic_marginal",
        "kernel": {"name": "dyadic"},
        "initial": 0.0,
        "estimator": {"name": "marginal_convergence", "t_grid": [1,2,3,4,5,6,7,8],
                      "pi": {"name": "lebesgue", "atoms": 4096}, "exact": true, "seed": 2024},
        "bounds": {"constant": 1.0, "rate": 0.6931471805599453},
        "fit": {"window_lo": 1, "window_hi": 8}
    })";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.verdicts.size() == 8);
    for (const auto& v : report.verdicts) {
        CAPTURE(v.label);
        CHECK(v.outcome == "pass");
        CHECK(v.margin >= 0.0);
        CHECK(v.half_width == 0.0);
    }
    CHECK(report.has_fit);
    CHECK(report.fit.c == doctest::Approx(std::log(2.0)).epsilon(0.02));
    const std::string text = report.text();
    CHECK(mentions(text, "scenario: dyadic_marginal"));
    CHECK(mentions(text, "kernel: dyadic"));
    CHECK(mentions(text, "t_grid=[1,2,3,4,5,6,7,8]"));
    CHECK(mentions(text, "pi=lebesgue(4096)"));
    CHECK(mentions(text, "seed=2024"));
    CHECK(mentions(text, "overall: pass (8 pass, 0 fail, 0 inconclusive) exit=0"));
}

TEST_CASE("zero test function with zero reference passes with margin zero") {
    const std::string cfg = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.25, "test_functions": ["zero"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [3], "pi_ref": 0.0,
                      "n": 50, "seed": 4},
        "bounds": {"ceiling": 0.0}
    })";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.verdicts.size() == 1);
    CHECK(report.verdicts[0].outcome == "pass");
    CHECK(report.verdicts[0].value == 0.0);
    CHECK(report.verdicts[0].half_width == 0.0);
    CHECK(report.verdicts[0].margin == 0.0);
}

TEST_CASE("verdicts split into fail and inconclusive as the rule dictates") {
    const std::string base = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0, "test_functions": ["x"],
        "estimator": {"name": "lp_error", "p": 1, "t_grid": [2], "pi_ref": 0.5,
                      "n": 40, "seed": 11},
        "bounds": {"ceiling": )";

    const Report wide = run_scenario(base + "1.0}}");
    REQUIRE(wide.curve.entries.size() == 1);
    const double value = wide.curve.entries[0].value;
    const double hw = wide.curve.entries[0].half_width;
    REQUIRE(value > 0.0);
    REQUIRE(hw > 0.0);
    CHECK(wide.exit_code == 0);

    // A ceiling far below value - hw is a definite fail.
    const Report failing = run_scenario(base + "1e-9}}");
    CHECK(failing.exit_code == 2);
    REQUIRE(failing.verdicts.size() == 1);
    CHECK(failing.verdicts[0].outcome == "fail");
    CHECK(failing.verdicts[0].margin > 0.0);

    // A ceiling equal to the estimate sits inside the half-width band.
    const Report straddle = run_scenario(base + format_double(value) + "}}");
    CHECK(straddle.exit_code == 3);
    REQUIRE(straddle.verdicts.size() == 1);
    CHECK(straddle.verdicts[0].outcome == "inconclusive");
}

TEST_CASE("per-step ceilings judge only listed grid points") {
    const std::string cfg = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.0,
        "estimator": {"name": "marginal_convergence", "t_grid": [1,2,3],
                      "pi": {"name": "lebesgue", "atoms": 1024}, "exact": true, "seed": 9},
        "bounds": {"ceilings": [[1, 0.6], [3, 0.2]]}
    })";
    const Report report = run_scenario(cfg);
    REQUIRE(report.verdicts.size() == 2);
    CHECK(report.verdicts[0].label == "t=1");
    CHECK(report.verdicts[1].label == "t=3");
    CHECK(report.exit_code == 0);
}

TEST_CASE("uniform condition report names both grids") {
    const std::string cfg = R"({
        "kernel": {"name": "dyadic"}, "initial": 0.25,
        "estimator": {"name": "uniform_condition", "t": 2, "s_grid": [0, 1],
                      "n_outer": 50, "n_inner": 50,
                      "pi": {"name": "lebesgue", "atoms": 64}, "seed": 5}
    })";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    const std::string text = report.text();
    CHECK(mentions(text, "s_grid=[0,1]"));
    CHECK(mentions(text, "t=2"));
    CHECK(mentions(text, "seed=5"));
    CHECK(mentions(text, "overall: no bounds declared exit=0"));
    REQUIRE(report.curve.entries.size() == 1);
    CHECK(report.curve.entries[0].value >= 0.0);
}

TEST_CASE("finite chain scenario with stationary reference") {
    const std::string cfg = R"({
        "name": "two_state",
        "kernel": {"name": "finite", "matrix": [[0.7, 0.3], [0.6, 0.4]],
                   "dist": [[0, 1], [1, 0]]},
        "initial": 0,
        "test_functions": ["state"],
        "estimator": {"name": "lp_error", "p": 2, "t_grid": [1, 2, 4],
                      "pi_ref": "stationary", "n": 400, "seed": 7},
        "bounds": {"ceiling": 0.75}
    })";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    // stationary law of this chain is (2/3, 1/3), so the reference mean is 1/3
    CHECK(mentions(report.scenario.estimator_line, "pi_ref=stationary(0.3333333333333"));
    CHECK(report.curve.entries.size() == 3);
}

TEST_CASE("artifacts are byte-identical across reruns and worker counts") {
    namespace fs = std::filesystem;
    const fs::path scratch = "cli_scratch";
    fs::remove_all(scratch);

    auto config_for = [&](const std::string& dir) {
        return std::string(R"({
            "name": "det",
            "kernel": {"name": "finite", "matrix": [[0.7, 0.3], [0.6, 0.4]],
                       "dist": [[0, 1], [1, 0]]},
            "initial": 0,
            "test_functions": ["state"],
            "estimator": {"name": "lp_error", "p": 1, "t_grid": [1, 2, 4],
                          "pi_ref": "stationary", "n": 500, "seed": 99},
            "bounds": {"ceiling": 0.9},
            "output": ")") +
               dir + "\"}";
    };

    const Report a = run_scenario(config_for("cli_scratch/a"));
    const Report b = run_scenario(config_for("cli_scratch/b"));
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    const std::string curve_a = slurp(scratch / "a" / "det_curve.csv");
    CHECK(curve_a == slurp(scratch / "b" / "det_curve.csv"));
    CHECK(slurp(scratch / "a" / "det_report.txt") == slurp(scratch / "b" / "det_report.txt"));
    CHECK(mentions(curve_a, "t,value,half_width,n\n"));

    set_worker_count(3);
    const Report c = run_scenario(config_for("cli_scratch/c"));
    set_worker_count(0);
    CHECK(c.exit_code == 0);
    CHECK(curve_a == slurp(scratch / "c" / "det_curve.csv"));
}

TEST_CASE("rate_fit estimator reads a stored curve") {
    namespace fs = std::filesystem;
    const fs::path scratch = "cli_scratch_fit";
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    {
        std::ofstream out(scratch / "curve.csv");
        out << "t,value,half_width,n\n";
        for (int t = 1; t <= 10; ++t) {
            out << t << "," << format_double(std::pow(2.0, -t)) << ",0,1000\n";
        }
    }
    const std::string cfg = std::string(R"({
        "name": "fit_only",
        "kernel": {"name": "dyadic"},
        "estimator": {"name": "rate_fit", "curve": ")") +
                            (scratch / "curve.csv").string() +
                            R"(", "window_lo": 1, "window_hi": 10, "seed": 1},
        "output": ")" + (scratch / "out").string() +
                            "\"}";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.has_fit);
    CHECK(report.fit.c == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(report.fit.C == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fs::exists(scratch / "out" / "fit_only_fit.csv"));
    CHECK(fs::exists(scratch / "out" / "fit_only_curve.csv"));
    CHECK(fs::exists(scratch / "out" / "fit_only_report.txt"));
    CHECK(mentions(report.text(), "fit: C="));

    // The standalone fit estimator rejects the separate fit block.
    const std::string clash = std::string(R"({
        "kernel": {"name": "dyadic"},
        "estimator": {"name": "rate_fit", "curve": ")") +
                              (scratch / "curve.csv").string() +
                              R"(", "window_lo": 1, "window_hi": 10, "seed": 1},
        "fit": {"window_lo": 1, "window_hi": 10}
    })";
    CHECK(mentions(config_error_of(clash), "config.fit"));

    const std::string missing = R"({
        "kernel": {"name": "dyadic"},
        "estimator": {"name": "rate_fit", "curve": "cli_scratch_fit/absent.csv",
                      "window_lo": 1, "window_hi": 10, "seed": 1}
    })";
    CHECK(mentions(config_error_of(missing), "config.estimator.curve"));
}

TEST_CASE("delay kernel scenario runs end to end") {
    const std::string cfg = R"({
        "kernel": {"name": "delay_sde", "dt": 0.0625, "delta": 1.0},
        "initial": 0.0,
        "estimator": {"name": "contraction", "x2": 1.0, "t_grid": [1, 2],
                      "n": 30, "seed": 12}
    })";
    const Report report = run_scenario(cfg);
    CHECK(report.exit_code == 0);
    REQUIRE(report.curve.entries.size() == 2);
    CHECK(report.curve.entries[0].value > 0.0);
    CHECK(mentions(report.scenario.kernel_line, "delay_sde dt=0.0625"));
    CHECK(mentions(report.scenario.initial_line, "constant 0"));
}
