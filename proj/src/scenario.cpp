#include "ergolab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "ergolab/csv.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/oracle.hpp"

namespace ergolab {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void cfg_fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) cfg_fail(where, "expected an object");
}

// Strict schema: any key outside the whitelist is an error, named in full.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            cfg_fail(where + "." + item.key(), "unknown key");
        }
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double need_number(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) cfg_fail(where + "." + key, "missing");
    if (!v->is_number()) cfg_fail(where + "." + key, "must be a number");
    return v->get<double>();
}

std::int64_t need_int(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) cfg_fail(where + "." + key, "missing");
    if (!v->is_number_integer()) cfg_fail(where + "." + key, "must be an integer");
    return v->get<std::int64_t>();
}

std::string need_string(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) cfg_fail(where + "." + key, "missing");
    if (!v->is_string()) cfg_fail(where + "." + key, "must be a string");
    return v->get<std::string>();
}

bool flag_set(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) return false;
    if (!v->is_boolean()) cfg_fail(where + "." + key, "must be a boolean");
    return v->get<bool>();
}

std::vector<double> need_grid(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) cfg_fail(where + "." + key, "missing");
    if (!v->is_array() || v->empty()) cfg_fail(where + "." + key, "must be a nonempty array");
    std::vector<double> grid;
    grid.reserve(v->size());
    for (const auto& e : *v) {
        if (!e.is_number()) cfg_fail(where + "." + key, "entries must be numbers");
        grid.push_back(e.get<double>());
    }
    return grid;
}

std::uint64_t need_seed(const json& est) {
    const json* v = find(est, "seed");
    if (!v) cfg_fail("config.estimator.seed", "missing (an explicit seed is required)");
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return v->get<std::uint64_t>();
    cfg_fail("config.estimator.seed", "must be a nonnegative integer");
}

std::string fmt_grid(const std::vector<double>& grid) {
    std::string out = "[";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) out += ",";
        out += format_double(grid[i]);
    }
    return out + "]";
}

// ---------------------------------------------------------------------------
// Bounds: one ceiling rule compared against every produced curve entry.
// ---------------------------------------------------------------------------

struct BoundSpec {
    enum class Mode { none, scalar, geometric, table };
    Mode mode = Mode::none;
    double ceiling = 0.0;
    double constant = 0.0;
    double rate = 0.0;
    double offset = 0.0;
    std::vector<std::pair<double, double>> table;

    std::optional<double> ceiling_at(double t) const {
        switch (mode) {
            case Mode::none:
                return std::nullopt;
            case Mode::scalar:
                return ceiling;
            case Mode::geometric:
                return constant * std::exp(-rate * t) + offset;
            case Mode::table:
                for (const auto& [tt, c] : table) {
                    if (std::abs(tt - t) <= 1e-9) return c;
                }
                return std::nullopt;
        }
        return std::nullopt;
    }
};

BoundSpec parse_bounds(const json& root, std::string& echo) {
    BoundSpec spec;
    const json* b = find(root, "bounds");
    if (!b) return spec;
    expect_object(*b, "config.bounds");
    check_keys(*b, "config.bounds", {"ceiling", "ceilings", "constant", "rate", "offset"});
    const int has_scalar = find(*b, "ceiling") != nullptr;
    const int has_table = find(*b, "ceilings") != nullptr;
    const int has_geo = find(*b, "constant") || find(*b, "rate") || find(*b, "offset");
    if (has_scalar + has_table + has_geo != 1) {
        cfg_fail("config.bounds",
                 "give exactly one of: ceiling, ceilings, constant+rate[+offset]");
    }
    if (has_scalar) {
        spec.mode = BoundSpec::Mode::scalar;
        spec.ceiling = need_number(*b, "config.bounds", "ceiling");
        echo = "ceiling=" + format_double(spec.ceiling);
    } else if (has_table) {
        const json& tbl = *find(*b, "ceilings");
        if (!tbl.is_array() || tbl.empty()) {
            cfg_fail("config.bounds.ceilings", "must be a nonempty array of [t, ceiling] pairs");
        }
        spec.mode = BoundSpec::Mode::table;
        echo = "ceilings=[";
        for (std::size_t i = 0; i < tbl.size(); ++i) {
            const json& row = tbl[i];
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
                !row[1].is_number()) {
                cfg_fail("config.bounds.ceilings", "entries must be [t, ceiling] number pairs");
            }
            spec.table.emplace_back(row[0].get<double>(), row[1].get<double>());
            if (i) echo += ",";
            echo += "[" + format_double(spec.table.back().first) + "," +
                    format_double(spec.table.back().second) + "]";
        }
        echo += "]";
    } else {
        spec.mode = BoundSpec::Mode::geometric;
        spec.constant = need_number(*b, "config.bounds", "constant");
        spec.rate = need_number(*b, "config.bounds", "rate");
        spec.offset = find(*b, "offset") ? need_number(*b, "config.bounds", "offset") : 0.0;
        echo = "geometric constant=" + format_double(spec.constant) +
               " rate=" + format_double(spec.rate) + " offset=" + format_double(spec.offset);
    }
    return spec;
}

Verdict judge(const std::string& label, double value, double half_width, double ceiling) {
    Verdict v{label, value, half_width, ceiling, "", 0.0};
    if (value + half_width <= ceiling) {
        v.outcome = "pass";
        v.margin = ceiling - value - half_width;
    } else if (value - half_width > ceiling) {
        v.outcome = "fail";
        v.margin = value - half_width - ceiling;
    } else {
        v.outcome = "inconclusive";
        v.margin = ceiling - value;
    }
    return v;
}

void apply_bounds(Report& report, const json& root, Scenario& sc) {
    std::string echo;
    const BoundSpec bounds = parse_bounds(root, echo);
    sc.bounds_line = echo;
    for (const auto& e : report.curve.entries) {
        if (const auto ceiling = bounds.ceiling_at(e.t)) {
            report.verdicts.push_back(
                judge("t=" + format_double(e.t), e.value, e.half_width, *ceiling));
        }
    }
}

// ---------------------------------------------------------------------------
// State-type hooks: everything the generic estimator driver needs that
// depends on the kernel family.
// ---------------------------------------------------------------------------

template <class S>
struct Hooks {
    Kernel<S> kernel;
    std::function<S(const json&, const std::string&)> parse_state;
    std::function<std::string(const json&)> echo_state;
    std::function<TestFunction<S>(const std::string&, const std::string&)> make_fn;
    // Both resolvers also hand back the echo string for the report.
    std::function<DiscreteMeasure<S>(const json&, const std::string&, std::uint64_t,
                                     std::string&)>
        resolve_pi;
    std::function<double(const json&, const std::string&, const TestFunction<S>&, std::string&)>
        resolve_pi_ref;
};

double gaussian_quantile(double p) {
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 120; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Installs the full pi resolver on `hooks`: dirac and burn_in work for every
// family (burn_in draws the empirical t-step marginal from the scenario's
// initial state on a seed derived from the scenario seed); anything else
// falls through to the family resolver.
template <class S>
void install_pi_resolver(
    Hooks<S>& hooks, const json* initial,
    std::function<DiscreteMeasure<S>(const json&, const std::string&, std::string&)> family) {
    const Hooks<S> base = hooks;  // self-contained copy for the lambda
    hooks.resolve_pi = [base, initial, family](const json& p, const std::string& where,
                                               std::uint64_t seed,
                                               std::string& echo) -> DiscreteMeasure<S> {
        const std::string name = need_string(p, where, "name");
        if (name == "dirac") {
            check_keys(p, where, {"name", "at"});
            const json* at = find(p, "at");
            if (!at) cfg_fail(where + ".at", "missing");
            echo = "dirac(" + base.echo_state(*at) + ")";
            return DiscreteMeasure<S>::dirac(base.parse_state(*at, where + ".at"));
        }
        if (name == "burn_in") {
            check_keys(p, where, {"name", "t", "n"});
            const double t = need_number(p, where, "t");
            const std::int64_t n = need_int(p, where, "n");
            if (n < 1) cfg_fail(where + ".n", "must be >= 1");
            if (!initial) cfg_fail("config.initial", "missing (burn_in starts from it)");
            const S x0 = base.parse_state(*initial, "config.initial");
            echo = "burn_in(t=" + format_double(t) + ",n=" + format_int(n) + ")";
            return marginal_sample(base.kernel, x0, t, n, RngStream::derive_key(seed, 0xB19))
                .to_discrete();
        }
        return family(p, where, echo);
    };
}

// ---------------------------------------------------------------------------
// Generic estimator driver.
// ---------------------------------------------------------------------------

template <class S>
Report run_with(const json& root, const Hooks<S>& hooks, Scenario sc) {
    const json& est = *find(root, "estimator");
    const std::string est_name = need_string(est, "config.estimator", "name");
    const std::uint64_t seed = need_seed(est);
    sc.seed = seed;
    const json* initial = find(root, "initial");

    auto need_initial = [&]() -> S {
        if (!initial) cfg_fail("config.initial", "missing");
        sc.initial_line = hooks.echo_state(*initial);
        return hooks.parse_state(*initial, "config.initial");
    };

    std::vector<std::string> fn_names;
    if (const json* tf = find(root, "test_functions")) {
        if (!tf->is_array()) cfg_fail("config.test_functions", "must be an array of names");
        for (const auto& e : *tf) {
            if (!e.is_string()) cfg_fail("config.test_functions", "entries must be strings");
            fn_names.push_back(e.get<std::string>());
        }
    }
    sc.test_functions = fn_names;
    auto first_fn = [&]() -> TestFunction<S> {
        if (fn_names.empty()) cfg_fail("config.test_functions", "this estimator needs one");
        return hooks.make_fn(fn_names.front(), "config.test_functions");
    };

    auto resolve_pi = [&](std::string& echo) {
        const json* p = find(est, "pi");
        if (!p) cfg_fail("config.estimator.pi", "missing");
        expect_object(*p, "config.estimator.pi");
        return hooks.resolve_pi(*p, "config.estimator.pi", seed, echo);
    };

    const std::string W = "config.estimator";
    Report report;
    std::string line = est_name;

    if (est_name == "lp_error") {
        check_keys(est, W, {"name", "seed", "p", "t_grid", "n", "pi_ref"});
        const S x0 = need_initial();
        const TestFunction<S> f = first_fn();
        const double p = need_number(est, W, "p");
        const auto grid = need_grid(est, W, "t_grid");
        const std::int64_t n = need_int(est, W, "n");
        std::string pi_echo;
        const double pi_ref = hooks.resolve_pi_ref(est, W, f, pi_echo);
        report.curve = lp_error_profile(hooks.kernel, x0, f, p, grid, pi_ref, n, seed);
        line += " p=" + format_double(p) + " t_grid=" + fmt_grid(grid) + " pi_ref=" + pi_echo +
                " n=" + format_int(n);
    } else if (est_name == "second_moment") {
        check_keys(est, W, {"name", "seed", "t_grid", "n", "pi_ref"});
        const S x0 = need_initial();
        const TestFunction<S> f = first_fn();
        const auto grid = need_grid(est, W, "t_grid");
        const std::int64_t n = need_int(est, W, "n");
        std::string pi_echo;
        const double pi_ref = hooks.resolve_pi_ref(est, W, f, pi_echo);
        for (const double t : grid) {
            const Estimate e = second_moment_gap(hooks.kernel, x0, f, pi_ref, t, n, seed);
            report.curve.append(t, e.value, e.half_width, n);
        }
        line += " t_grid=" + fmt_grid(grid) + " pi_ref=" + pi_echo + " n=" + format_int(n);
    } else if (est_name == "marginal_convergence") {
        check_keys(est, W, {"name", "seed", "t_grid", "n", "pi", "exact"});
        const S x0 = need_initial();
        const auto grid = need_grid(est, W, "t_grid");
        const bool exact = flag_set(est, W, "exact");
        if (exact && find(est, "n")) cfg_fail(W + ".n", "not used in exact mode");
        const std::int64_t n = exact ? 0 : need_int(est, W, "n");
        std::string pi_echo;
        const auto pi_hat = resolve_pi(pi_echo);
        report.curve = marginal_convergence(hooks.kernel, x0, pi_hat, grid, n, seed, exact);
        line += " t_grid=" + fmt_grid(grid) + " pi=" + pi_echo +
                (exact ? " exact" : " n=" + format_int(n));
    } else if (est_name == "uniform_condition") {
        check_keys(est, W,
                   {"name", "seed", "t", "s_grid", "n_outer", "n_inner", "pi", "max_budget"});
        const S x0 = need_initial();
        const double t = need_number(est, W, "t");
        const auto s_grid = need_grid(est, W, "s_grid");
        const std::int64_t n_outer = need_int(est, W, "n_outer");
        const std::int64_t n_inner = need_int(est, W, "n_inner");
        std::string pi_echo;
        const auto pi_hat = resolve_pi(pi_echo);
        const double max_budget =
            find(est, "max_budget") ? need_number(est, W, "max_budget") : 1e8;
        const Estimate e = uniform_condition(hooks.kernel, x0, pi_hat, t, s_grid, n_outer,
                                             n_inner, seed, max_budget);
        report.curve.append(t, e.value, e.half_width, n_outer);
        line += " t=" + format_double(t) + " s_grid=" + fmt_grid(s_grid) +
                " n_outer=" + format_int(n_outer) + " n_inner=" + format_int(n_inner) +
                " pi=" + pi_echo;
    } else if (est_name == "contraction") {
        check_keys(est, W, {"name", "seed", "t_grid", "n", "x2", "exact"});
        const S x1 = need_initial();
        const json* x2j = find(est, "x2");
        if (!x2j) cfg_fail(W + ".x2", "missing");
        const S x2 = hooks.parse_state(*x2j, W + ".x2");
        const auto grid = need_grid(est, W, "t_grid");
        const bool exact = flag_set(est, W, "exact");
        if (exact && find(est, "n")) cfg_fail(W + ".n", "not used in exact mode");
        const std::int64_t n = exact ? 0 : need_int(est, W, "n");
        for (const double t : grid) {
            report.curve.append(t, contraction_factor(hooks.kernel, x1, x2, t, n, seed, exact),
                                0.0, n);
        }
        line += " x2=" + hooks.echo_state(*x2j) + " t_grid=" + fmt_grid(grid) +
                (exact ? " exact" : " n=" + format_int(n));
    } else if (est_name == "lipschitz") {
        check_keys(est, W, {"name", "seed", "t_grid", "n", "pairs", "exact"});
        const TestFunction<S> f = first_fn();
        const json* pj = find(est, "pairs");
        if (!pj || !pj->is_array() || pj->empty()) {
            cfg_fail(W + ".pairs", "must be a nonempty array of [x, y] pairs");
        }
        std::vector<std::pair<S, S>> pairs;
        std::string pairs_echo = "[";
        for (std::size_t i = 0; i < pj->size(); ++i) {
            const json& row = (*pj)[i];
            if (!row.is_array() || row.size() != 2) {
                cfg_fail(W + ".pairs", "entries must be [x, y] pairs");
            }
            pairs.emplace_back(hooks.parse_state(row[0], W + ".pairs"),
                               hooks.parse_state(row[1], W + ".pairs"));
            if (i) pairs_echo += ",";
            pairs_echo += "[" + hooks.echo_state(row[0]) + "," + hooks.echo_state(row[1]) + "]";
        }
        pairs_echo += "]";
        const auto grid = need_grid(est, W, "t_grid");
        const bool exact = flag_set(est, W, "exact");
        if (exact && find(est, "n")) cfg_fail(W + ".n", "not used in exact mode");
        const std::int64_t n = exact ? 0 : need_int(est, W, "n");
        for (const double t : grid) {
            report.curve.append(
                t, lipschitz_constant_estimate(hooks.kernel, f, t, pairs, n, seed, exact), 0.0,
                n);
        }
        line += " pairs=" + pairs_echo + " t_grid=" + fmt_grid(grid) +
                (exact ? " exact" : " n=" + format_int(n));
    } else if (est_name == "invariance") {
        check_keys(est, W, {"name", "seed", "t_grid", "n", "pi", "exact"});
        if (fn_names.empty()) {
            cfg_fail("config.test_functions", "this estimator needs at least one");
        }
        std::vector<TestFunction<S>> fns;
        for (const auto& nm : fn_names) {
            fns.push_back(hooks.make_fn(nm, "config.test_functions"));
        }
        const auto grid = need_grid(est, W, "t_grid");
        const bool exact = flag_set(est, W, "exact");
        if (exact && find(est, "n")) cfg_fail(W + ".n", "not used in exact mode");
        const std::int64_t n = exact ? 0 : need_int(est, W, "n");
        std::string pi_echo;
        const auto pi_hat = resolve_pi(pi_echo);
        for (const double t : grid) {
            const Estimate e = invariance_check(hooks.kernel, pi_hat, fns, t, n, seed, exact);
            report.curve.append(t, e.value, e.half_width, n);
        }
        line += " t_grid=" + fmt_grid(grid) + " pi=" + pi_echo +
                (exact ? " exact" : " n=" + format_int(n));
    } else {
        cfg_fail("config.estimator.name", "unknown estimator '" + est_name + "'");
    }

    line += " seed=" + format_int(static_cast<std::int64_t>(seed));
    sc.estimator_line = line;

    if (const json* fj = find(root, "fit")) {
        expect_object(*fj, "config.fit");
        check_keys(*fj, "config.fit", {"window_lo", "window_hi"});
        const double lo = need_number(*fj, "config.fit", "window_lo");
        const double hi = need_number(*fj, "config.fit", "window_hi");
        report.fit = rate_fit(report.curve, lo, hi);
        report.has_fit = true;
    }

    apply_bounds(report, root, sc);
    report.scenario = std::move(sc);
    return report;
}

// ---------------------------------------------------------------------------
// Family hooks
// ---------------------------------------------------------------------------

double parse_scalar(const json& j, const std::string& where) {
    if (!j.is_number()) cfg_fail(where, "must be a number");
    return j.get<double>();
}

std::string echo_json_number(const json& j) {
    if (j.is_number()) return format_double(j.get<double>());
    return j.dump();
}

Hooks<double> scalar_hooks(Kernel<double> kernel) {
    Hooks<double> h;
    h.kernel = std::move(kernel);
    h.parse_state = parse_scalar;
    h.echo_state = echo_json_number;
    h.make_fn = [](const std::string& name, const std::string& where) -> TestFunction<double> {
        if (name == "x") return {[](const double& x) { return x; }, 1.0, 1.0, "x"};
        if (name == "x^2") return {[](const double& x) { return x * x; }, 2.0, 1.0, "x^2"};
        if (name == "cos_pi") {
            return {[](const double& x) { return std::cos(kPi * x); }, kPi, 1.0, "cos_pi"};
        }
        if (name == "zero") return {[](const double&) { return 0.0; }, 0.0, 0.0, "zero"};
        cfg_fail(where, "unknown test function '" + name + "'");
    };
    h.resolve_pi_ref = [](const json& est, const std::string& where, const TestFunction<double>&,
                          std::string& echo) {
        const double v = need_number(est, where, "pi_ref");
        echo = format_double(v);
        return v;
    };
    return h;
}

DiscreteMeasure<double> lebesgue_pi(const json& p, const std::string& where, std::string& echo) {
    check_keys(p, where, {"name", "atoms"});
    const std::int64_t m = need_int(p, where, "atoms");
    if (m < 1 || m > 10000000) cfg_fail(where + ".atoms", "must be in [1, 1e7]");
    std::vector<double> atoms(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        atoms[static_cast<std::size_t>(i)] =
            (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    }
    echo = "lebesgue(" + format_int(m) + ")";
    return DiscreteMeasure<double>(
        std::move(atoms),
        std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

DiscreteMeasure<double> gaussian_pi(const json& p, const std::string& where, std::string& echo) {
    check_keys(p, where, {"name", "atoms", "mean", "sd"});
    const std::int64_t m = need_int(p, where, "atoms");
    if (m < 1 || m > 1000000) cfg_fail(where + ".atoms", "must be in [1, 1e6]");
    const double mean = need_number(p, where, "mean");
    const double sd = need_number(p, where, "sd");
    if (!(sd > 0.0)) cfg_fail(where + ".sd", "must be positive");
    std::vector<double> atoms(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < m; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        atoms[static_cast<std::size_t>(i)] = mean + sd * gaussian_quantile(q);
    }
    echo = "gaussian(atoms=" + format_int(m) + ",mean=" + format_double(mean) +
           ",sd=" + format_double(sd) + ")";
    return DiscreteMeasure<double>(
        std::move(atoms),
        std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

DiscreteMeasure<double> scalar_family_pi(const json& p, const std::string& where,
                                         std::string& echo) {
    const std::string name = need_string(p, where, "name");
    if (name == "lebesgue") return lebesgue_pi(p, where, echo);
    if (name == "gaussian") return gaussian_pi(p, where, echo);
    cfg_fail(where + ".name", "unknown pi resolver '" + name + "'");
}

Hooks<int> finite_hooks(Kernel<int> kernel, std::shared_ptr<const FiniteChain> chain) {
    Hooks<int> h;
    h.kernel = std::move(kernel);
    const int k = chain->size();
    h.parse_state = [k](const json& j, const std::string& where) -> int {
        if (!j.is_number_integer()) cfg_fail(where, "must be a state index");
        const auto v = j.get<std::int64_t>();
        if (v < 0 || v >= k) cfg_fail(where, "state index out of range");
        return static_cast<int>(v);
    };
    h.echo_state = [](const json& j) { return j.dump(); };
    h.make_fn = [k](const std::string& name, const std::string& where) -> TestFunction<int> {
        if (name == "state") {
            return {[](const int& s) { return static_cast<double>(s); }, 0.0,
                    static_cast<double>(k - 1), "state"};
        }
        if (name == "indicator0") {
            return {[](const int& s) { return s == 0 ? 1.0 : 0.0; }, 0.0, 1.0, "indicator0"};
        }
        if (name == "zero") return {[](const int&) { return 0.0; }, 0.0, 0.0, "zero"};
        cfg_fail(where, "unknown test function '" + name + "'");
    };
    h.resolve_pi_ref = [chain](const json& est, const std::string& where,
                               const TestFunction<int>& f, std::string& echo) -> double {
        const json* v = find(est, "pi_ref");
        if (!v) cfg_fail(where + ".pi_ref", "missing");
        if (v->is_string()) {
            if (v->get<std::string>() != "stationary") {
                cfg_fail(where + ".pi_ref", "must be a number or \"stationary\"");
            }
            const double ref = stationary_distribution(*chain).expectation(f.eval);
            echo = "stationary(" + format_double(ref) + ")";
            return ref;
        }
        if (!v->is_number()) cfg_fail(where + ".pi_ref", "must be a number or \"stationary\"");
        echo = format_double(v->get<double>());
        return v->get<double>();
    };
    return h;
}

Hooks<PathSegment> delay_hooks(Kernel<PathSegment> kernel, int nodes_per_unit) {
    Hooks<PathSegment> h;
    h.kernel = std::move(kernel);
    h.parse_state = [nodes_per_unit](const json& j, const std::string& where) -> PathSegment {
        if (!j.is_number()) cfg_fail(where, "must be a number (constant initial segment level)");
        return PathSegment::constant(j.get<double>(), nodes_per_unit);
    };
    h.echo_state = [](const json& j) { return "constant " + echo_json_number(j); };
    h.make_fn = [](const std::string& name,
                   const std::string& where) -> TestFunction<PathSegment> {
        if (name == "head") {
            return {[](const PathSegment& s) { return s.head(); }, 1.0, 0.0, "head"};
        }
        if (name == "sup_norm") {
            return {[](const PathSegment& s) {
                        double m = 0.0;
                        for (const double v : s.values) m = std::max(m, std::abs(v));
                        return m;
                    },
                    1.0, 0.0, "sup_norm"};
        }
        if (name == "zero") return {[](const PathSegment&) { return 0.0; }, 0.0, 0.0, "zero"};
        cfg_fail(where, "unknown test function '" + name + "'");
    };
    h.resolve_pi_ref = [](const json& est, const std::string& where,
                          const TestFunction<PathSegment>&, std::string& echo) {
        const double v = need_number(est, where, "pi_ref");
        echo = format_double(v);
        return v;
    };
    return h;
}

// ---------------------------------------------------------------------------
// rate_fit runs on a previously written curve, so it needs no kernel family.
// ---------------------------------------------------------------------------

ConvergenceCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) cfg_fail("config.estimator.curve", "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) cfg_fail("config.estimator.curve", "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value,half_width,n") {
        cfg_fail("config.estimator.curve", "expected header t,value,half_width,n");
    }
    ConvergenceCurve curve;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 4) {
            cfg_fail("config.estimator.curve",
                     "line " + std::to_string(line_no) + ": expected 4 fields");
        }
        curve.append(parse_double_field(fields[0], line_no),
                     parse_double_field(fields[1], line_no),
                     parse_double_field(fields[2], line_no),
                     static_cast<std::int64_t>(parse_double_field(fields[3], line_no)));
    }
    if (curve.entries.empty()) cfg_fail("config.estimator.curve", "no data rows");
    return curve;
}

Report run_rate_fit(const json& root, Scenario sc) {
    const json& est = *find(root, "estimator");
    check_keys(est, "config.estimator", {"name", "seed", "curve", "window_lo", "window_hi"});
    sc.seed = need_seed(est);
    const std::string path = need_string(est, "config.estimator", "curve");
    const double lo = need_number(est, "config.estimator", "window_lo");
    const double hi = need_number(est, "config.estimator", "window_hi");
    if (find(root, "fit")) cfg_fail("config.fit", "not applicable to the rate_fit estimator");
    Report report;
    report.curve = load_curve_csv(path);
    report.fit = rate_fit(report.curve, lo, hi);
    report.has_fit = true;
    sc.estimator_line = "rate_fit curve=" + path + " window=[" + format_double(lo) + "," +
                        format_double(hi) +
                        "] seed=" + format_int(static_cast<std::int64_t>(sc.seed));
    apply_bounds(report, root, sc);
    report.scenario = std::move(sc);
    return report;
}

void finish_report(Report& report) {
    bool any_fail = false, any_inconclusive = false;
    for (const auto& v : report.verdicts) {
        any_fail = any_fail || v.outcome == "fail";
        any_inconclusive = any_inconclusive || v.outcome == "inconclusive";
    }
    report.exit_code = any_fail ? 2 : (any_inconclusive ? 3 : 0);
}

void write_artifacts(const Report& report) {
    const std::string& dir = report.scenario.output_dir;
    if (dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto dump = [&](const std::string& stem, const std::string& content) {
        std::ofstream out(fs::path(dir) / (report.scenario.name + stem));
        out << content;
    };
    if (!report.curve.entries.empty()) dump("_curve.csv", report.curve.to_csv());
    if (report.has_fit) dump("_fit.csv", report.fit.to_csv());
    dump("_report.txt", report.text());
}

}  // namespace

std::string Report::text() const {
    std::string out;
    out += "scenario: " + scenario.name + "\n";
    out += "kernel: " + scenario.kernel_line + "\n";
    if (!scenario.initial_line.empty()) out += "initial: " + scenario.initial_line + "\n";
    if (!scenario.test_functions.empty()) {
        out += "test functions:";
        for (const auto& f : scenario.test_functions) out += " " + f;
        out += "\n";
    }
    out += "estimator: " + scenario.estimator_line + "\n";
    out += "bounds: " + (scenario.bounds_line.empty() ? "none" : scenario.bounds_line) + "\n";
    if (!curve.entries.empty()) out += "curve:\n" + curve.to_csv();
    if (has_fit) {
        out += "fit: C=" + format_double(fit.C) + " c=" + format_double(fit.c) +
               " residual=" + format_double(fit.residual) + " window=[" +
               format_double(fit.window_lo) + "," + format_double(fit.window_hi) + "]\n";
    }
    if (!verdicts.empty()) {
        out += "verdicts:\n";
        for (const auto& v : verdicts) {
            out += "  " + v.label + ": value=" + format_double(v.value) +
                   " half_width=" + format_double(v.half_width) +
                   " ceiling=" + format_double(v.ceiling) + " " + v.outcome +
                   " margin=" + format_double(v.margin) + "\n";
        }
    }
    int n_pass = 0, n_fail = 0, n_inc = 0;
    for (const auto& v : verdicts) {
        n_pass += v.outcome == "pass";
        n_fail += v.outcome == "fail";
        n_inc += v.outcome == "inconclusive";
    }
    std::string overall = "no bounds declared";
    if (!verdicts.empty()) {
        overall = n_fail ? "fail" : (n_inc ? "inconclusive" : "pass");
        overall += " (" + std::to_string(n_pass) + " pass, " + std::to_string(n_fail) +
                   " fail, " + std::to_string(n_inc) + " inconclusive)";
    }
    out += "overall: " + overall + " exit=" + std::to_string(exit_code) + "\n";
    return out;
}

Report run_scenario(const std::string& config_text) {
    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    expect_object(root, "config");
    check_keys(root, "config",
               {"name", "kernel", "initial", "test_functions", "estimator", "bounds", "fit",
                "output"});

    Scenario sc;
    if (const json* n = find(root, "name")) {
        if (!n->is_string()) cfg_fail("config.name", "must be a string");
        sc.name = n->get<std::string>();
    }
    if (const json* o = find(root, "output")) {
        if (!o->is_string()) cfg_fail("config.output", "must be a string");
        sc.output_dir = o->get<std::string>();
    }

    const json* kj = find(root, "kernel");
    if (!kj) cfg_fail("config.kernel", "missing");
    expect_object(*kj, "config.kernel");
    const std::string kname = need_string(*kj, "config.kernel", "name");
    if (kname != "dyadic" && kname != "ar1" && kname != "finite" && kname != "delay_sde") {
        cfg_fail("config.kernel.name",
                 "unknown kernel '" + kname + "' (known: ar1, delay_sde, dyadic, finite)");
    }

    const json* ej = find(root, "estimator");
    if (!ej) cfg_fail("config.estimator", "missing");
    expect_object(*ej, "config.estimator");
    const std::string est_name = need_string(*ej, "config.estimator", "name");

    Report report;
    if (est_name == "rate_fit") {
        sc.kernel_line = kname;
        report = run_rate_fit(root, std::move(sc));
    } else if (kname == "dyadic" || kname == "ar1") {
        Kernel<double> kernel;
        if (kname == "dyadic") {
            check_keys(*kj, "config.kernel", {"name"});
            sc.kernel_line = "dyadic";
            kernel = dyadic_kernel();
        } else {
            check_keys(*kj, "config.kernel", {"name", "rho", "sigma"});
            const double rho = need_number(*kj, "config.kernel", "rho");
            const double sigma = need_number(*kj, "config.kernel", "sigma");
            sc.kernel_line = "ar1 rho=" + format_double(rho) + " sigma=" + format_double(sigma);
            kernel = ar1_kernel(rho, sigma);
        }
        Hooks<double> hooks = scalar_hooks(std::move(kernel));
        install_pi_resolver<double>(hooks, find(root, "initial"), scalar_family_pi);
        report = run_with<double>(root, hooks, std::move(sc));
    } else if (kname == "finite") {
        check_keys(*kj, "config.kernel", {"name", "matrix", "dist", "labels", "csv"});
        FiniteChain chain;
        if (const json* csv = find(*kj, "csv")) {
            if (find(*kj, "matrix") || find(*kj, "dist") || find(*kj, "labels")) {
                cfg_fail("config.kernel", "give either csv or matrix+dist, not both");
            }
            if (!csv->is_string()) cfg_fail("config.kernel.csv", "must be a path string");
            chain = load_finite_chain_csv(csv->get<std::string>());
            sc.kernel_line = "finite states=" + std::to_string(chain.size()) +
                             " source=" + csv->get<std::string>();
        } else {
            auto matrix_of = [&](const char* key) {
                const json* v = find(*kj, key);
                if (!v) cfg_fail(std::string("config.kernel.") + key, "missing");
                if (!v->is_array()) {
                    cfg_fail(std::string("config.kernel.") + key, "must be an array of rows");
                }
                std::vector<std::vector<double>> rows;
                for (const auto& r : *v) {
                    if (!r.is_array()) {
                        cfg_fail(std::string("config.kernel.") + key, "rows must be arrays");
                    }
                    std::vector<double> row;
                    for (const auto& x : r) {
                        if (!x.is_number()) {
                            cfg_fail(std::string("config.kernel.") + key,
                                     "entries must be numbers");
                        }
                        row.push_back(x.get<double>());
                    }
                    rows.push_back(std::move(row));
                }
                return rows;
            };
            std::vector<std::string> labels;
            if (const json* lj = find(*kj, "labels")) {
                if (!lj->is_array()) cfg_fail("config.kernel.labels", "must be an array");
                for (const auto& l : *lj) {
                    if (!l.is_string()) {
                        cfg_fail("config.kernel.labels", "entries must be strings");
                    }
                    labels.push_back(l.get<std::string>());
                }
            }
            chain = make_finite_chain(matrix_of("matrix"), std::move(labels), matrix_of("dist"));
            sc.kernel_line = "finite states=" + std::to_string(chain.size()) + " source=inline";
        }
        auto shared_chain = std::make_shared<const FiniteChain>(std::move(chain));
        Kernel<int> kernel =
            finite_kernel(shared_chain->P, shared_chain->labels, shared_chain->dist);
        Hooks<int> hooks = finite_hooks(std::move(kernel), shared_chain);
        install_pi_resolver<int>(
            hooks, find(root, "initial"),
            [shared_chain](const json& p, const std::string& where,
                           std::string& echo) -> DiscreteMeasure<int> {
                const std::string name = need_string(p, where, "name");
                if (name == "stationary") {
                    check_keys(p, where, {"name"});
                    echo = "stationary";
                    return stationary_distribution(*shared_chain);
                }
                cfg_fail(where + ".name", "unknown pi resolver '" + name + "'");
            });
        report = run_with<int>(root, hooks, std::move(sc));
    } else {  // delay_sde
        check_keys(*kj, "config.kernel", {"name", "dt", "delta"});
        const double dt = find(*kj, "dt") ? need_number(*kj, "config.kernel", "dt") : 1.0 / 64.0;
        const double delta =
            find(*kj, "delta") ? need_number(*kj, "config.kernel", "delta") : 1.0;
        sc.kernel_line = "delay_sde dt=" + format_double(dt) + " delta=" + format_double(delta);
        const int nodes = static_cast<int>(std::llround(1.0 / dt));
        Hooks<PathSegment> hooks =
            delay_hooks(delay_sde_kernel(default_delay_diffusion, dt, delta), nodes);
        install_pi_resolver<PathSegment>(
            hooks, find(root, "initial"),
            [](const json& p, const std::string& where,
               std::string&) -> DiscreteMeasure<PathSegment> {
                const std::string name = need_string(p, where, "name");
                cfg_fail(where + ".name", "unknown pi resolver '" + name +
                                              "' for a path state (use burn_in or dirac)");
            });
        report = run_with<PathSegment>(root, hooks, std::move(sc));
    }

    finish_report(report);
    write_artifacts(report);
    return report;
}

Registry default_registry() {
    Registry r;
    r.kernels = {
        {"dyadic", "no parameters"},
        {"finite", "matrix=[[..]] dist=[[..]] labels=[..] | csv=<path>"},
        {"ar1", "rho in (-1,1), sigma > 0"},
        {"delay_sde", "dt=1/m (default 0.015625), delta > 0 (default 1)"},
    };
    r.estimators = {
        {"lp_error", "p t_grid pi_ref n seed"},
        {"marginal_convergence", "t_grid pi (n | exact) seed"},
        {"uniform_condition", "t s_grid n_outer n_inner pi seed [max_budget]"},
        {"contraction", "x2 t_grid (n | exact) seed"},
        {"lipschitz", "pairs t_grid (n | exact) seed"},
        {"invariance", "t_grid pi (n | exact) seed"},
        {"second_moment", "t_grid pi_ref n seed"},
        {"rate_fit", "curve window_lo window_hi seed"},
    };
    r.test_functions = {
        {"x", "scalar state: identity"},
        {"x^2", "scalar state: square"},
        {"cos_pi", "scalar state: cos(pi x)"},
        {"state", "finite state: index as a real"},
        {"indicator0", "finite state: 1 at state 0"},
        {"head", "path state: right endpoint"},
        {"sup_norm", "path state: max |value| on the segment"},
        {"zero", "any state: constant 0"},
    };
    return r;
}

std::string list_components(const Registry& reg) {
    std::string out;
    auto section = [&](const char* title, const std::vector<ComponentDoc>& docs) {
        if (docs.empty()) return;
        out += std::string(title) + ":\n";
        std::size_t width = 0;
        for (const auto& d : docs) width = std::max(width, d.name.size());
        for (const auto& d : docs) {
            out += "  " + d.name + std::string(width - d.name.size() + 2, ' ') + d.schema + "\n";
        }
    };
    section("kernels", reg.kernels);
    section("estimators", reg.estimators);
    section("test functions", reg.test_functions);
    return out;
}

}  // namespace ergolab
