#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oogrisk/error.hpp"
#include "oogrisk/risk.hpp"

namespace py = pybind11;
using namespace oogrisk;

namespace {

SamplingMethod method_of(const std::string& m) {
  if (m == "grid") return SamplingMethod::Grid;
  if (m == "iid") return SamplingMethod::IID;
  throw Error(ErrorCode::InvalidArgument, "method must be 'grid' or 'iid'", "method");
}

RiskOptions options(int threads) {
  RiskOptions o;
  o.threads = threads;
  return o;
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Output-to-output gain risk assessment";

  // Leaked on purpose: the type must outlive the module's translators.
  static py::handle error_type =
      py::exception<Error>(m, "OogriskError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = error_type(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("path") = e.path();
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<SystemSpec>(m, "SystemSpec")
      .def_readonly("name", &SystemSpec::name)
      .def_property_readonly("params",
                             [](const SystemSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& p : s.uncertainty.params) out.push_back(p.name);
                               return out;
                             })
      .def("to_json", &serialize_config);

  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));

  py::class_<ClosedLoopRealization>(m, "Realization")
      .def_readonly("A", &ClosedLoopRealization::A_cl)
      .def_readonly("B", &ClosedLoopRealization::B_cl)
      .def_readonly("C_p", &ClosedLoopRealization::C_p)
      .def_readonly("D_p", &ClosedLoopRealization::D_p)
      .def_readonly("C_r", &ClosedLoopRealization::C_r)
      .def_readonly("D_r", &ClosedLoopRealization::D_r)
      .def_readonly("spectral_radius", &ClosedLoopRealization::spectral_radius)
      .def_readonly("schur_stable", &ClosedLoopRealization::schur_stable);

  m.def(
      "make_realization",
      [](Matrix A, Matrix B, Matrix Cp, Matrix Dp, Matrix Cr, Matrix Dr, bool allow_unstable) {
        return make_realization(std::move(A), std::move(B), std::move(Cp), std::move(Dp), std::move(Cr),
                                std::move(Dr), allow_unstable ? StabilityPolicy::Warn : StabilityPolicy::Require);
      },
      py::arg("A"), py::arg("B"), py::arg("C_p"), py::arg("D_p"), py::arg("C_r"), py::arg("D_r"),
      py::arg("allow_unstable") = false);
  m.def(
      "build_realization",
      [](const SystemSpec& s, const Vector& delta) { return build_realization(s, delta); },
      py::arg("spec"), py::arg("delta"));

  m.def(
      "boundedness", [](const ClosedLoopRealization& r) { return std::string(to_string(boundedness_single(r).verdict)); },
      py::arg("realization"));
  m.def(
      "oog_gain",
      [](const ClosedLoopRealization& r) -> std::optional<double> { return oog_single(r).gamma; },
      py::arg("realization"), "Squared output-to-output gain, or None when unbounded.");
  m.def(
      "coupled_gain",
      [](const std::vector<ClosedLoopRealization>& rs) -> py::object {
        const SolveResult s = solve(build_coupled_sdp(rs));
        if (s.status != SolveStatus::Optimal) return py::none();
        const Vector g = s.gamma.cwiseMax(0.0);
        return py::make_tuple(g.sum(), g);
      },
      py::arg("realizations"), "(gamma_ra, gamma) of the coupled program, or None when not solved.");
  m.def("finite_horizon_oracle", &finite_horizon_oracle, py::arg("realization"), py::arg("T"));

  m.def(
      "sample_scenarios",
      [](const SystemSpec& s, long long n, const std::string& method, std::uint64_t seed) {
        return sample_scenarios(s.uncertainty, n, method_of(method), seed).deltas;
      },
      py::arg("spec"), py::arg("n"), py::arg("method") = "grid", py::arg("seed") = 0);

  m.def(
      "assess_var",
      [](const SystemSpec& s, long long n, double beta, const std::string& method, std::uint64_t seed,
         int threads) {
        const auto sc = sample_scenarios(s.uncertainty, n, method_of(method), seed);
        std::string text;
        {
          py::gil_scoped_release release;
          text = report_to_json(var_assess(sc, s, beta, options(threads)));
        }
        return loads(text);
      },
      py::arg("spec"), py::arg("n"), py::arg("beta"), py::arg("method") = "grid", py::arg("seed") = 0,
      py::arg("threads") = 0, "VaR report as a dict.");
  m.def(
      "assess_expected_loss",
      [](const SystemSpec& s, long long n, double lam, const std::string& method, std::uint64_t seed,
         int threads) {
        const auto sc = sample_scenarios(s.uncertainty, n, method_of(method), seed);
        std::string text;
        {
          py::gil_scoped_release release;
          text = report_to_json(expected_loss_assess(sc, s, lam, options(threads)));
        }
        return loads(text);
      },
      py::arg("spec"), py::arg("n"), py::arg("lam"), py::arg("method") = "grid", py::arg("seed") = 0,
      py::arg("threads") = 0, "Expected-loss report as a dict.");

  m.def("hoeffding_sample_count", &hoeffding_sample_count, py::arg("epsilon1"), py::arg("beta1"));
  m.def("campi_epsilon", &campi_epsilon, py::arg("n"), py::arg("k"), py::arg("lam"));
  m.def("min_samples_for_epsilon", &min_samples_for_epsilon, py::arg("target_epsilon"), py::arg("lam"));
}
