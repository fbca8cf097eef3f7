#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vshock/errors.hpp"
#include "vshock/experiment.hpp"
#include "vshock/lemma_lab.hpp"
#include "vshock/metrics.hpp"
#include "vshock/shock_profile.hpp"

namespace py = pybind11;
using namespace vshock;

namespace {

py::object to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Viscous shock profiles, solver runs and lemma checks";

  auto base = py::register_exception<Error>(m, "VshockError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DegenerateShockError>(m, "DegenerateShockError", base.ptr());
  py::register_exception<ToleranceError>(m, "ToleranceError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BlowUpError>(m, "BlowUpError", base.ptr());

  py::class_<FluxSpec>(m, "FluxSpec")
      .def_static("from_name", &FluxSpec::from_name)
      .def_property_readonly("name", &FluxSpec::name)
      .def("value", &FluxSpec::value)
      .def("derivative", &FluxSpec::derivative);

  py::class_<ShockParams>(m, "ShockParams")
      .def_static("make", &ShockParams::make, py::arg("u_minus"), py::arg("u_plus"), py::arg("p"),
                  py::arg("flux") = FluxSpec::burgers())
      .def_readonly("u_minus", &ShockParams::u_minus)
      .def_readonly("u_plus", &ShockParams::u_plus)
      .def_readonly("p", &ShockParams::p)
      .def_readonly("gamma", &ShockParams::gamma)
      .def_readonly("flux", &ShockParams::flux);

  py::class_<Profile>(m, "Profile")
      .def_property_readonly("xi", [](const Profile& p) {
        std::vector<double> xi(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) xi[j] = p.xi(j);
        return xi;
      })
      .def_property_readonly("U", [](const Profile& p) { return std::vector<double>(p.U().begin(), p.U().end()); })
      .def_property_readonly("Uprime",
                             [](const Profile& p) { return std::vector<double>(p.Uprime().begin(), p.Uprime().end()); })
      .def_property_readonly("x_L", &Profile::x_L)
      .def_property_readonly("x_R", &Profile::x_R)
      .def_property_readonly("params", &Profile::params)
      .def("value", &Profile::value)
      .def("slope", &Profile::slope);

  m.def("rankine_hugoniot_speed", &rankine_hugoniot_speed);
  m.def("profile_slope", &profile_slope);
  m.def("build_profile", &build_profile, py::arg("params"), py::arg("xi_min"), py::arg("xi_max"), py::arg("n"),
        py::arg("tol") = 1e-12);
  m.def("make_profile", &make_profile, py::arg("params"), py::arg("xi_min"), py::arg("xi_max"), py::arg("n"),
        py::arg("tol") = 1e-12);

  m.def("default_c0", &default_c0);
  m.def(
      "weighted_poincare_check",
      [](const std::function<double(double)>& w, double u_plus, double u_minus,
         const std::function<double(double)>& dw) {
        const PoincareResult r = weighted_poincare_check(w, u_plus, u_minus, dw);
        return py::dict(py::arg("lhs") = r.lhs, py::arg("rhs") = r.rhs,
                        py::arg("rhs_classical") = r.rhs_classical, py::arg("pass") = r.pass);
      },
      py::arg("w"), py::arg("u_plus"), py::arg("u_minus"), py::arg("dw") = std::function<double(double)>{});
  m.def(
      "fit_decay_rate",
      [](const std::vector<double>& t, const std::vector<double>& norm, double r, double t_a, double t_b,
         double tolerance_factor) {
        RateOptions opt;
        opt.t_a = t_a;
        opt.t_b = t_b;
        opt.tolerance_factor = tolerance_factor;
        return to_python(fit_decay_rate(t, norm, r, opt).to_json());
      },
      py::arg("t"), py::arg("norm"), py::arg("r"), py::arg("t_a") = -1.0, py::arg("t_b") = -1.0,
      py::arg("tolerance_factor") = 1.1);

  m.def("ode_decay_exponent", [](double a, double b, double alpha, double beta, double gamma_exp) {
    RateOdeParams q{a, b, alpha, beta, gamma_exp};
    const DecayExponent d = ode_decay_exponent(q);
    return py::make_tuple(d.mu, d.C0);
  });
  m.def(
      "ode_comparison_test",
      [](double a, double b, double alpha, double beta, double gamma_exp, double t_max, std::size_t n_steps,
         const std::vector<double>& y0s) {
        return to_python(ode_comparison_test({a, b, alpha, beta, gamma_exp}, t_max, n_steps, y0s).to_json());
      },
      py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("beta"), py::arg("gamma_exp"), py::arg("t_max"),
      py::arg("n_steps") = 10000, py::arg("y0s") = std::vector<double>{0.1, 1.0, 10.0, 100.0});
  m.def("power_gap_ratio", &power_gap_ratio);
  m.def("h1", &h1);
  m.def("h2", &h2);
  m.def("min_h2", [](double p, double c0) {
    const Minimum r = min_h2(p, c0);
    return py::make_tuple(r.value, r.argmin);
  });
  m.def("lemma_c0", &lemma_c0);
  m.def(
      "scan_abm",
      [](double p, double c0, std::size_t theta_points, std::size_t random_pairs, std::uint64_t seed) {
        ScanSpec s;
        s.theta_points = theta_points;
        s.random_pairs = random_pairs;
        s.seed = seed;
        return to_python(scan_abm(p, c0, s).to_json());
      },
      py::arg("p"), py::arg("c0"), py::arg("theta_points") = 100001, py::arg("random_pairs") = 100000,
      py::arg("seed") = 20240531);
  m.def("estimate_p0", [](double tol) { return estimate_p0(tol).p0; }, py::arg("tolerance") = 1e-10);

  m.def("config_keys", &ExperimentConfig::keys);
  m.def(
      "run_experiment",
      [](const std::string& scenario, const std::map<std::string, std::string>& overrides) {
        ExperimentConfig c = ExperimentConfig::preset(scenario_from_string(scenario));
        for (const auto& [k, v] : overrides) c.set(k, v);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c);
        }
        py::object summary = to_python(r.summary);
        return py::make_tuple(r.exit_code, summary);
      },
      py::arg("scenario"), py::arg("overrides") = std::map<std::string, std::string>{});
}
