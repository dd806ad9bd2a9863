"""Smoke tests for the Python bindings: one pass over every exposed surface."""

import math
import sys

import ergolab as el


def check(cond, label):
    if not cond:
        raise AssertionError(label)
    print(f"ok: {label}")


def main():
    # --- measures and W1 solvers ------------------------------------------
    mu = el.DiscreteMeasure([0.0, 1.0], [0.5, 0.5])
    nu = el.DiscreteMeasure.dirac(0.5)
    check(len(mu) == 2 and len(nu) == 1, "measure construction")
    check(abs(mu.expectation(lambda x: x) - 0.5) < 1e-15, "expectation")

    space = el.interval_space()
    v1 = el.w1_1d(mu, nu)
    v2, plan = el.w1_exact(mu, nu, space)
    v3, support, potential = el.w1_dual(mu, nu, space)
    check(abs(v1 - 0.5) < 1e-12, "w1_1d value")
    check(abs(v2 - v1) < 1e-12 and abs(v3 - v1) < 1e-9, "primal and dual agree")
    check(abs(sum(m for _, _, m in plan) - 1.0) < 1e-12, "plan mass")
    check(len(support) == len(potential) == 3, "dual support")
    check(abs(el.tv_discrete(mu, nu) - 1.0) < 1e-15, "tv distance")

    # --- kernels and simulation ---------------------------------------------
    k = el.dyadic_kernel()
    t1 = el.simulate(k, 0.25, 20, 7)
    t2 = el.simulate(k, 0.25, 20, 7)
    t3 = el.simulate(k, 0.25, 20, 8)
    check(t1.states == t2.states, "simulation is reproducible")
    check(t1.states != t3.states, "seed changes the path")
    check(len(t1) == 21 and all(0.0 <= x <= 1.0 for x in t1.states), "path stays in [0,1]")

    f = el.TestFunction(lambda x: x, 1.0, 1.0, "x")
    check(abs(el.time_average(t1, f)) <= 1.0, "time average from a python callable")

    # --- estimators -----------------------------------------------------------
    est = el.lp_error(k, 0.25, f, 2.0, 50.0, 0.5, 200, 11)
    value, half_width = est
    check(value >= 0.0 and half_width > 0.0, "lp_error estimate")

    atoms = [(i + 0.5) / 1024 for i in range(1024)]
    leb = el.DiscreteMeasure(atoms, [1.0 / 1024] * 1024)
    curve = el.marginal_convergence(k, 0.0, leb, [1, 2, 3, 4, 5, 6], 0, 1, exact=True)
    check(all(e.half_width == 0.0 for e in curve.entries), "exact curve has no spread")
    check(all(e.value <= 2.0 ** (-e.t) for e in curve.entries), "dyadic marginal decay")
    fit = el.rate_fit(curve, 1, 6)
    check(abs(fit.c - math.log(2.0)) < 0.05, "fitted rate is log 2")

    factor = el.contraction_factor(k, 0.0, 1.0, 3.0, 0, 1, exact=True)
    check(abs(factor - 0.125) < 1e-12, "exact contraction factor 2^-3")

    gap = el.second_moment_gap(k, 0.25, f, 0.5, 40.0, 300, 5)
    check(gap.half_width > 0.0, "second moment gap half-width")

    # --- scenario runner -------------------------------------------------------
    report = el.run_scenario(
        """
        {
            "kernel": {"name": "dyadic"},
            "initial": 0.0,
            "estimator": {"name": "marginal_convergence", "t_grid": [1, 2, 3, 4],
                          "pi": {"name": "lebesgue", "atoms": 1024},
                          "exact": true, "seed": 3},
            "bounds": {"constant": 1.0, "rate": 0.6931471805599453}
        }
        """
    )
    check(report.exit_code == 0, "scenario exit code")
    check(all(v.outcome == "pass" for v in report.verdicts), "scenario verdicts")
    check("overall: pass" in report.text(), "scenario report text")

    try:
        el.run_scenario('{"kernel": {"name": "levy"}}')
        check(False, "bad kernel must raise")
    except el.ConfigError as e:
        check("config.kernel.name" in str(e), "ConfigError names the field")

    check("dyadic" in el.list_components(), "component listing")
    check(el.worker_count() == 1, "bindings pin one worker")

    print("all python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
