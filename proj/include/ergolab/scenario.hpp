#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/ergodic.hpp"

namespace ergolab {

// Echo of a parsed scenario: everything a report must restate so a run is
// auditable from its output alone — grids, budgets, and the seed, never a
// hidden default.
struct Scenario {
    std::string name = "scenario";
    std::string kernel_line;
    std::string initial_line;
    std::vector<std::string> test_functions;
    std::string estimator_line;  // name plus every parameter, grids and seed included
    std::string bounds_line;     // empty when no bounds were declared
    std::string output_dir;      // empty: no files are written
    std::uint64_t seed = 0;
};

// One bound comparison. Verdicts are half-width honest: pass needs
// value + half_width <= ceiling, fail needs value - half_width > ceiling,
// anything straddling the ceiling is inconclusive. The margin is the
// distance to the decision boundary (for inconclusive, the signed distance
// ceiling - value of the point estimate).
struct Verdict {
    std::string label;
    double value = 0.0;
    double half_width = 0.0;
    double ceiling = 0.0;
    std::string outcome;  // "pass" | "fail" | "inconclusive"
    double margin = 0.0;
};

struct Report {
    Scenario scenario;
    ConvergenceCurve curve;
    bool has_fit = false;
    RateFit fit;
    std::vector<Verdict> verdicts;
    // 0 all-pass (or no bounds), 2 any fail, 3 inconclusive without fails.
    int exit_code = 0;

    // Deterministic human-readable summary; identical runs emit identical
    // bytes.
    std::string text() const;
};

// Parses and validates the JSON config, runs the named estimator, and — when
// an output directory is configured — writes <name>_curve.csv,
// <name>_fit.csv and <name>_report.txt into it. ConfigError names the
// offending field.
Report run_scenario(const std::string& config_text);

struct ComponentDoc {
    std::string name;
    std::string schema;
};

struct Registry {
    std::vector<ComponentDoc> kernels;
    std::vector<ComponentDoc> estimators;
    std::vector<ComponentDoc> test_functions;
};

Registry default_registry();

// Plain-text listing of a registry; an empty registry lists as an empty
// string.
std::string list_components(const Registry& reg);

}  // namespace ergolab
