#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ftns/config.hpp"
#include "ftns/errors.hpp"
#include "ftns/runner.hpp"

namespace py = pybind11;

namespace {

ftns::RunConfig parse(const std::string& text) {
  return ftns::parse_config(nlohmann::json::parse(text), text, "python");
}

py::dict trace_dict(const ftns::CoherenceTrace& tr) {
  std::vector<std::string> mask;
  for (auto m : tr.mask) mask.push_back(ftns::to_string(m));
  py::dict d;
  d["t"] = tr.t;
  d["C"] = tr.C;
  d["mask"] = mask;
  d["config_hash"] = tr.config_hash;
  return d;
}

py::dict spectrum_dict(const ftns::ReconstructedSpectrum& s) {
  py::dict d;
  d["omega"] = s.omega;
  d["S"] = s.S;
  d["method"] = ftns::to_string(s.method);
  d["d_omega"] = s.d_omega;
  d["omega_max"] = s.omega_max;
  d["padded_length"] = s.padded_length;
  if (s.one_over_f) {
    const auto& f = *s.one_over_f;
    py::dict fit;
    fit["alpha"] = f.alpha;
    fit["beta"] = f.beta;
    fit["delta"] = f.delta;
    fit["gamma"] = f.gamma;
    fit["A"] = f.amplitude;
    fit["n"] = f.exponent;
    fit["present"] = f.present;
    d["one_over_f"] = fit;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fourier transform noise spectroscopy core";
  m.attr("__version__") = FTNS_VERSION;

  auto input_error = py::register_exception<ftns::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ftns::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ftns::NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "filter_value",
      [](const std::string& sequence, double omega, double t, int n_pulses) {
        return ftns::filter_value(ftns::PulseSequence::parse(sequence, n_pulses), omega, t);
      },
      py::arg("sequence"), py::arg("omega"), py::arg("t"), py::arg("n_pulses") = 0);

  m.def(
      "attenuation",
      [](const std::string& spectrum_json, const std::string& sequence, const std::vector<double>& times,
         int n_pulses) {
        const auto model = nlohmann::json::parse(spectrum_json).get<ftns::SpectrumModel>();
        return ftns::attenuation(model, ftns::PulseSequence::parse(sequence, n_pulses), times);
      },
      py::arg("spectrum_json"), py::arg("sequence"), py::arg("times"), py::arg("n_pulses") = 0);

  m.def(
      "spectrum_value",
      [](const std::string& spectrum_json, const std::vector<double>& omega) {
        const auto model = nlohmann::json::parse(spectrum_json).get<ftns::SpectrumModel>();
        std::vector<double> out;
        for (double w : omega) out.push_back(model(w));
        return out;
      },
      py::arg("spectrum_json"), py::arg("omega"));

  m.def("config_hash", [](const std::string& config_json) { return parse(config_json).hash(); },
        py::arg("config_json"));

  m.def("simulate", [](const std::string& config_json) { return trace_dict(ftns::simulate_for(parse(config_json))); },
        py::arg("config_json"));

  m.def(
      "reconstruct",
      [](const std::string& config_json) {
        const auto cfg = parse(config_json);
        py::gil_scoped_release release;
        auto rec = ftns::reconstruct_for(cfg, nullptr);
        py::gil_scoped_acquire acquire;
        return spectrum_dict(rec);
      },
      py::arg("config_json"));
  (void)input_error;
}
