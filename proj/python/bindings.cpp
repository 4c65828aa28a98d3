#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coalflow/cli.hpp"
#include "coalflow/coalescent.hpp"
#include "coalflow/csbp_analytic.hpp"
#include "coalflow/csbp_sim.hpp"
#include "coalflow/error.hpp"
#include "coalflow/fleming_viot.hpp"
#include "coalflow/spec_parse.hpp"

namespace py = pybind11;
using namespace coalflow;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lambda-coalescents, generalized Fleming-Viot flows and stable CSBPs";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UnsupportedFamily>(m, "UnsupportedFamily", PyExc_NotImplementedError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  m.def("psi", [](const std::string& mech, double q) { return psi_eval(parse_mechanism(mech), q); },
        py::arg("mech"), py::arg("q"));
  m.def(
      "ut", [](const std::string& mech, double t, double q, bool ode) {
        const auto b = parse_mechanism(mech);
        return ode ? ut_ode(b, t, q) : ut(b, t, q);
      },
      py::arg("mech"), py::arg("t"), py::arg("q"), py::arg("ode") = false);
  m.def(
      "levy_total_mass", [](const std::string& mech, double t) { return levy_total_mass(parse_mechanism(mech), t).value; },
      py::arg("mech"), py::arg("t"));
  m.def(
      "levy_cdf", [](const std::string& mech, double t, double x) { return levy_cdf(parse_mechanism(mech), t, x); },
      py::arg("mech"), py::arg("t"), py::arg("x"));

  m.def(
      "simulate_csbp",
      [](const std::string& mech, std::vector<double> points, double t, double delta, std::uint64_t seed) {
        Rng rng(seed);
        return simulate_csbp_flow(parse_mechanism(mech), std::move(points), t, delta, rng).values;
      },
      py::arg("mech"), py::arg("points"), py::arg("t"), py::arg("delta") = 1e-3, py::arg("seed") = 1,
      "Values Z(t, x) of one delta-truncated flow at the given points.");
  m.def(
      "simulate_coalescent",
      [](const std::string& lambda, std::uint64_t n, double t, std::uint64_t seed) {
        Rng rng(seed);
        return simulate_to(parse_lambda(lambda), BlockState::singletons(n), t, rng).sizes;
      },
      py::arg("lambda_spec"), py::arg("n"), py::arg("t"), py::arg("seed") = 1,
      "Block sizes at time t from n singletons.");
  m.def(
      "simulate_fv",
      [](const std::string& lambda, std::vector<double> points, double t, std::uint64_t seed) {
        Rng rng(seed);
        return simulate_fv_flow(FiniteNu::from_lambda(parse_lambda(lambda)), std::move(points), t, rng).values;
      },
      py::arg("lambda_spec"), py::arg("points"), py::arg("t"), py::arg("seed") = 1,
      "Values F_t(y) of one Fleming-Viot flow with finite nu.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line interface; returns (exit_code, stdout, stderr).");
}
