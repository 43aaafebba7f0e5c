#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gbpobs/bench.hpp"
#include "gbpobs/oracle.hpp"
#include "gbpobs/report.hpp"
#include "gbpobs/restoration.hpp"

namespace py = pybind11;
using namespace gbpobs;

namespace {

struct Inputs {
  PowerNetwork net;
  MeasurementSet ms;
};

Inputs load(const std::string& case_json, const std::string& meas_json) {
  std::istringstream c(case_json), m(meas_json);
  auto net = parse_network(c);
  auto ms = parse_measurement_set(m, net);
  return {std::move(net), std::move(ms)};
}

RunConfig run_config(const std::string& probe, std::uint64_t seed, int tau_max, double v_i) {
  RunConfig cfg;
  if (probe != "lowest" && probe != "random") throw InputError("probe must be 'lowest' or 'random'");
  cfg.probe = {probe == "random" ? ProbePolicy::SeededRandom : ProbePolicy::LowestId, seed};
  cfg.sweep.tau_max = tau_max;
  cfg.v_i = v_i;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_gbpobs, m) {
  m.doc() = "Variance-only belief propagation observability analysis";

  static py::exception<AmbiguousConvergence> ambiguous(m, "AmbiguousConvergence", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const AmbiguousConvergence& e) {
      ambiguous(e.what());
    }
  });

  m.def(
      "islands",
      [](const std::string& case_json, const std::string& meas_json, const std::string& probe, std::uint64_t seed,
         int tau_max) {
        const auto in = load(case_json, meas_json);
        const auto cfg = run_config(probe, seed, tau_max, 1.0);
        py::gil_scoped_release nogil;
        return islands_report(in.net, detect_islands(in.net, in.ms, {cfg.sweep, cfg.probe}), cfg).dump();
      },
      py::arg("case_json"), py::arg("meas_json"), py::arg("probe") = "lowest", py::arg("seed") = 0,
      py::arg("tau_max") = SweepConfig{}.tau_max);

  m.def(
      "oracle",
      [](const std::string& case_json, const std::string& meas_json) {
        const auto in = load(case_json, meas_json);
        return oracle_report(in.net, oracle_islands(in.net, build_jacobian(in.net, in.ms)), RunConfig{}).dump();
      },
      py::arg("case_json"), py::arg("meas_json"));

  m.def(
      "restore",
      [](const std::string& case_json, const std::string& meas_json, std::optional<std::string> pseudo_json,
         double v_i, int tau_max) {
        const auto in = load(case_json, meas_json);
        auto cfg = run_config("lowest", 0, tau_max, v_i);
        std::optional<MeasurementSet> pseudo;
        if (pseudo_json) {
          std::istringstream p(*pseudo_json);
          pseudo = parse_measurement_set(p, in.net);
          cfg.candidate_order = "file";
        }
        py::gil_scoped_release nogil;
        const auto rep = run_restoration(in.net, in.ms, pseudo, {cfg.sweep, cfg.probe}, {cfg.sweep, cfg.v_i});
        return restore_report(in.net, rep, cfg).dump();
      },
      py::arg("case_json"), py::arg("meas_json"), py::arg("pseudo_json") = std::nullopt, py::arg("v_i") = 1.0,
      py::arg("tau_max") = SweepConfig{}.tau_max);

  m.def(
      "bench",
      [](std::size_t buses, std::size_t configs, double red_lo, double red_hi, std::uint64_t seed,
         const std::vector<std::string>& methods, double avg_degree) {
        BenchSpec spec;
        spec.configs = configs;
        spec.redundancy_lo = red_lo;
        spec.redundancy_hi = red_hi;
        spec.seed = seed;
        spec.methods.clear();
        for (const auto& s : methods) spec.methods.push_back(parse_method(s));
        const RunConfig cfg;
        py::gil_scoped_release nogil;
        const auto net = make_synthetic_network(buses, avg_degree, seed);
        const auto records = run_benchmark(net, spec, cfg);
        std::ostringstream csv;
        write_csv(csv, records);
        return std::make_pair(csv.str(), bench_summary(records, spec, cfg).dump());
      },
      py::arg("buses"), py::arg("configs"), py::arg("redundancy_lo") = 1.0, py::arg("redundancy_hi") = 2.0,
      py::arg("seed") = 1, py::arg("methods") = std::vector<std::string>{"gbp", "oracle"},
      py::arg("avg_degree") = 2.7);
}
