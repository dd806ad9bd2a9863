#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "ergolab/csv.hpp"
#include "ergolab/ergodic.hpp"
#include "ergolab/kernels.hpp"
#include "ergolab/metric.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/scenario.hpp"
#include "ergolab/wasserstein.hpp"

namespace py = pybind11;
using namespace ergolab;

using DM = DiscreteMeasure<double>;
using EM = EmpiricalMeasure<double>;
using MS = MetricSpace<double>;
using TF = TestFunction<double>;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Convergence experiments for Markov kernels in Wasserstein distance";

    // Python callbacks must stay on the calling thread (the GIL is never
    // released), so the module pins the estimator loops to one worker.
    set_worker_count(1);

    const auto base_exc = py::register_exception<Error>(m, "ErgolabError");
    py::register_exception<ConfigError>(m, "ConfigError", base_exc);

    m.def("set_worker_count", &set_worker_count, py::arg("n"),
          "Worker threads for estimator loops; keep 1 when test functions are "
          "Python callables");
    m.def("worker_count", &worker_count);

    // --- measures ---------------------------------------------------------
    py::class_<MS>(m, "MetricSpace");
    m.def("interval_space", &interval_space, "metric |x - y| on [0, 1]");
    m.def("real_line_space", &real_line_space, "metric min(1, |x - y|) on the real line");

    py::class_<DM>(m, "DiscreteMeasure")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("atoms"),
             py::arg("weights"))
        .def_static("dirac", [](double x) { return DM::dirac(x); }, py::arg("atom"))
        .def_property_readonly("atoms", &DM::atoms)
        .def_property_readonly("weights", &DM::weights)
        .def("expectation",
             [](const DM& mu, const std::function<double(double)>& f) {
                 return mu.expectation(f);
             })
        .def("__len__", &DM::size);

    py::class_<EM>(m, "EmpiricalMeasure")
        .def(py::init<std::vector<double>>(), py::arg("samples"))
        .def_property_readonly("samples", &EM::samples)
        .def("to_discrete", &EM::to_discrete)
        .def("__len__", &EM::size);

    m.def("w1_1d", &w1_1d, py::arg("mu"), py::arg("nu"),
          "closed-form W1 for the metric |x - y|");
    m.def(
        "w1_exact",
        [](const DM& mu, const DM& nu, const MS& space) {
            auto [value, plan] = w1_exact(mu, nu, space);
            py::list entries;
            for (const auto& e : plan.entries) {
                entries.append(py::make_tuple(e.from, e.to, e.mass));
            }
            return py::make_tuple(value, entries);
        },
        py::arg("mu"), py::arg("nu"), py::arg("space"),
        "transportation-simplex W1; returns (value, [(from, to, mass), ...])");
    m.def(
        "w1_dual",
        [](const DM& mu, const DM& nu, const MS& space) {
            auto sol = w1_dual(mu, nu, space);
            return py::make_tuple(sol.value, sol.support, sol.potential);
        },
        py::arg("mu"), py::arg("nu"), py::arg("space"),
        "Kantorovich-Rubinstein dual W1; returns (value, support, potential)");
    m.def("w1_auto", &w1_auto<double>, py::arg("mu"), py::arg("nu"), py::arg("space"));
    m.def("tv_discrete", &tv_discrete<double>, py::arg("mu"), py::arg("nu"));

    // --- kernels ------------------------------------------------------------
    py::class_<Kernel<double>>(m, "Kernel")
        .def_readonly("time_step", &Kernel<double>::time_step)
        .def_readonly("continuous_time", &Kernel<double>::continuous_time);
    m.def("dyadic_kernel", &dyadic_kernel);
    m.def("ar1_kernel", &ar1_kernel, py::arg("rho"), py::arg("sigma"));

    py::class_<Trajectory<double>>(m, "Trajectory")
        .def_readonly("states", &Trajectory<double>::states)
        .def_readonly("step", &Trajectory<double>::step)
        .def_readonly("origin", &Trajectory<double>::origin)
        .def("__len__", [](const Trajectory<double>& t) { return t.states.size(); });

    m.def("simulate", &simulate<double>, py::arg("kernel"), py::arg("x0"), py::arg("horizon"),
          py::arg("seed"));
    m.def(
        "marginal_sample",
        [](const Kernel<double>& k, double x0, double t, std::int64_t n, std::uint64_t seed) {
            return marginal_sample(k, x0, t, n, seed);
        },
        py::arg("kernel"), py::arg("x0"), py::arg("t"), py::arg("n"), py::arg("seed"));

    // --- estimators -----------------------------------------------------------
    py::class_<TF>(m, "TestFunction")
        .def(py::init([](std::function<double(double)> f, double lip, double sup,
                         std::string name) {
                 TF tf;
                 tf.eval = [f = std::move(f)](const double& x) { return f(x); };
                 tf.lipschitz_bound = lip;
                 tf.sup_bound = sup;
                 tf.name = std::move(name);
                 return tf;
             }),
             py::arg("eval"), py::arg("lipschitz_bound"), py::arg("sup_bound"),
             py::arg("name") = "f")
        .def_readonly("lipschitz_bound", &TF::lipschitz_bound)
        .def_readonly("sup_bound", &TF::sup_bound)
        .def_readonly("name", &TF::name)
        .def("__call__", [](const TF& f, double x) { return f.eval(x); });

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("half_width", &Estimate::half_width)
        .def("__iter__",
             [](const Estimate& e) {
                 return py::iter(py::make_tuple(e.value, e.half_width));
             })
        .def("__repr__", [](const Estimate& e) {
            return "Estimate(value=" + format_double(e.value) +
                   ", half_width=" + format_double(e.half_width) + ")";
        });

    py::class_<CurveEntry>(m, "CurveEntry")
        .def_readonly("t", &CurveEntry::t)
        .def_readonly("value", &CurveEntry::value)
        .def_readonly("half_width", &CurveEntry::half_width)
        .def_readonly("n_samples", &CurveEntry::n_samples);

    py::class_<ConvergenceCurve>(m, "ConvergenceCurve")
        .def(py::init<>())
        .def_readonly("entries", &ConvergenceCurve::entries)
        .def("append", &ConvergenceCurve::append, py::arg("t"), py::arg("value"),
             py::arg("half_width"), py::arg("n_samples"))
        .def("to_csv", &ConvergenceCurve::to_csv);

    py::class_<RateFit>(m, "RateFit")
        .def_readonly("C", &RateFit::C)
        .def_readonly("c", &RateFit::c)
        .def_readonly("residual", &RateFit::residual)
        .def_readonly("window_lo", &RateFit::window_lo)
        .def_readonly("window_hi", &RateFit::window_hi)
        .def("to_csv", &RateFit::to_csv);

    m.def("time_average", &time_average<double>, py::arg("trajectory"), py::arg("f"));
    m.def("lp_error", &lp_error<double>, py::arg("kernel"), py::arg("x0"), py::arg("f"),
          py::arg("p"), py::arg("t"), py::arg("pi_ref"), py::arg("n_traj"), py::arg("seed"));
    m.def("lp_error_profile", &lp_error_profile<double>, py::arg("kernel"), py::arg("x0"),
          py::arg("f"), py::arg("p"), py::arg("t_grid"), py::arg("pi_ref"), py::arg("n_traj"),
          py::arg("seed"));
    m.def("marginal_convergence", &marginal_convergence<double>, py::arg("kernel"),
          py::arg("x"), py::arg("pi_hat"), py::arg("t_grid"), py::arg("n"), py::arg("seed"),
          py::arg("exact") = false);
    m.def("uniform_condition", &uniform_condition<double>, py::arg("kernel"), py::arg("x"),
          py::arg("pi_hat"), py::arg("t"), py::arg("s_grid"), py::arg("n_outer"),
          py::arg("n_inner"), py::arg("seed"), py::arg("max_budget") = 1e8);
    m.def("contraction_factor", &contraction_factor<double>, py::arg("kernel"), py::arg("x1"),
          py::arg("x2"), py::arg("t"), py::arg("n"), py::arg("seed"),
          py::arg("exact") = false);
    m.def("lipschitz_constant_estimate", &lipschitz_constant_estimate<double>,
          py::arg("kernel"), py::arg("f"), py::arg("t"), py::arg("pairs"), py::arg("n"),
          py::arg("seed"), py::arg("exact") = false);
    m.def("invariance_check", &invariance_check<double>, py::arg("kernel"), py::arg("pi_hat"),
          py::arg("fns"), py::arg("t"), py::arg("n"), py::arg("seed"),
          py::arg("exact") = false);
    m.def("second_moment_gap", &second_moment_gap<double>, py::arg("kernel"), py::arg("x0"),
          py::arg("f"), py::arg("pi_ref"), py::arg("t"), py::arg("n_traj"), py::arg("seed"));
    m.def("coupling_curve", &coupling_curve<double>, py::arg("kernel"), py::arg("x1"),
          py::arg("x2"), py::arg("t_grid"), py::arg("n"), py::arg("seed"));
    m.def("self_distance_bias", &self_distance_bias<double>, py::arg("space"), py::arg("law"),
          py::arg("n"), py::arg("seed"));
    m.def("rate_fit", &rate_fit, py::arg("curve"), py::arg("window_lo"), py::arg("window_hi"));

    // --- scenarios -----------------------------------------------------------
    py::class_<Verdict>(m, "Verdict")
        .def_readonly("label", &Verdict::label)
        .def_readonly("value", &Verdict::value)
        .def_readonly("half_width", &Verdict::half_width)
        .def_readonly("ceiling", &Verdict::ceiling)
        .def_readonly("outcome", &Verdict::outcome)
        .def_readonly("margin", &Verdict::margin);

    py::class_<Report>(m, "Report")
        .def_readonly("curve", &Report::curve)
        .def_readonly("has_fit", &Report::has_fit)
        .def_readonly("fit", &Report::fit)
        .def_readonly("verdicts", &Report::verdicts)
        .def_readonly("exit_code", &Report::exit_code)
        .def("text", &Report::text);

    m.def("run_scenario", &run_scenario, py::arg("config_text"),
          "run a JSON scenario and judge its declared bounds");
    m.def("list_components", []() { return list_components(default_registry()); });
}
