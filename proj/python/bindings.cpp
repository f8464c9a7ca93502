// Thin binding layer. Configs and summaries cross the boundary as JSON text;
// the Python package converts them to dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "v2v/cli.hpp"
#include "v2v/config.hpp"
#include "v2v/engine.hpp"
#include "v2v/errors.hpp"

namespace py = pybind11;
using namespace v2v;

namespace {

std::string run_json(const std::string& cfg_text, const std::string& out_dir) {
  const auto cfg = nlohmann::json::parse(cfg_text);
  auto base = default_config();
  merge_config(base, cfg);
  const SimConfig sim = to_sim_config(base);
  sim.validate();
  MetricsBundle b;
  {
    py::gil_scoped_release release;
    b = run(sim);
  }
  b.config_hash = config_hash(base);
  if (!out_dir.empty()) write_report(b, sim.report, out_dir);
  return summary_json(b).dump();
}

std::vector<std::tuple<std::string, bool, std::string>> validate_json(const std::string& cfg_text) {
  auto base = default_config();
  merge_config(base, nlohmann::json::parse(cfg_text));
  std::vector<std::tuple<std::string, bool, std::string>> out;
  for (const auto& c : validation_report(base)) out.emplace_back(c.name, c.ok, c.detail);
  return out;
}

std::vector<std::pair<VehicleId, VehicleId>> da(const std::vector<std::tuple<VehicleId, VehicleId, double, double>>& c) {
  std::vector<Candidate> cands;
  for (const auto& [tx, rx, u_tx, u_rx] : c) cands.push_back({tx, rx, u_tx, u_rx, 0.0});
  return deferred_acceptance(cands).pairs;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"v2vsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  py::print(out.str(), py::arg("end") = "");
  if (!err.str().empty()) py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
  return code;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "mmWave V2V highway simulator core";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<RunError> run_error(m, "RunError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const RunError& e) {
      run_error(e.what());
    } catch (const nlohmann::json::exception& e) {
      config_error(e.what());
    }
  });

  m.def("default_config", [] { return default_config().dump(); });
  m.def("run", &run_json, py::arg("config"), py::arg("out_dir") = "");
  m.def("validate", &validate_json, py::arg("config"));
  m.def("cli", &cli, py::arg("args"));

  m.def("channel_gain_db", [](double s, int blockers) { return channel_gain_db(s, blockers, BlockageParams{}); },
        py::arg("distance_m"), py::arg("blockers") = 0);
  m.def("antenna_gain", py::overload_cast<double, double, double>(&antenna_gain), py::arg("width"),
        py::arg("error"), py::arg("sidelobe"));
  m.def("alignment_delay",
        [](double wt, double wr) { return alignment_delay(wt, wr, AntennaConfig{}, RadioConfig{}.slot_ms); },
        py::arg("width_tx"), py::arg("width_rx"));
  m.def("link_rate", &link_rate, py::arg("sinr"), py::arg("tau_ms"), py::arg("slot_ms"), py::arg("bandwidth_hz"),
        py::arg("aligning"));
  m.def("deferred_acceptance", &da, py::arg("candidates"),
        "candidates: (tx, rx, u_tx, u_rx) tuples; returns (tx, rx) pairs");
}
