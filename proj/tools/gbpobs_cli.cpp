#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gbpobs/bench.hpp"
#include "gbpobs/oracle.hpp"
#include "gbpobs/report.hpp"
#include "gbpobs/restoration.hpp"

using namespace gbpobs;

namespace {

enum Exit { Ok = 0, BadInput = 1, Ambiguous = 2, Exhausted = 3 };

void add_sweep_options(CLI::App* cmd, RunConfig& cfg, std::string& probe, const char* seed_flag = "--seed") {
  cmd->add_option("--probe", probe, "probe policy")->check(CLI::IsMember({"lowest", "random"}));
  cmd->add_option(seed_flag, cfg.probe.seed, "probe seed");
  cmd->add_option("--tol", cfg.sweep.epsilon, "relative change tolerance");
  cmd->add_option("--tau-max", cfg.sweep.tau_max, "sweep cap per pass")->check(CLI::PositiveNumber);
  cmd->add_option("--v-init", cfg.sweep.v_init);
  cmd->add_option("--v-low", cfg.sweep.v_low);
  cmd->add_option("--v-high", cfg.sweep.v_high);
  cmd->add_option("--v-zero", cfg.sweep.limits.zero);
  cmd->add_option("--v-inf", cfg.sweep.limits.infinite);
  cmd->add_option("--growth-window", cfg.sweep.growth_window)->check(CLI::PositiveNumber);
  cmd->add_option("--threads", cfg.sweep.threads, "threads inside one sweep")->check(CLI::PositiveNumber);
}

void emit(const Json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << j.dump(2) << '\n';
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto c = s.find(':');
  try {
    if (c == std::string::npos) {
      const double v = std::stod(s);
      return {v, v};
    }
    return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw InputError("bad redundancy range '" + s + "', expected LO:HI");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observability analysis of DC power networks by variance-only belief propagation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string probe = "lowest";
  bool auto_boundary = false;

  auto* islands = app.add_subcommand("islands", "identify observable islands");
  auto* restore = app.add_subcommand("restore", "restore observability with pseudo-measurements");
  auto* oracle = app.add_subcommand("oracle", "exact island partition");
  for (auto* cmd : {islands, restore, oracle}) {
    cmd->add_option("--case", cfg.case_path, "network JSON")->required();
    cmd->add_option("--meas", cfg.meas_path, "measurement JSON")->required();
    cmd->add_option("--out", cfg.out_path, "report path (stdout when omitted)");
  }
  add_sweep_options(islands, cfg, probe);
  add_sweep_options(restore, cfg, probe);
  auto* pseudo_opt = restore->add_option("--pseudo", cfg.pseudo_path, "pseudo-measurement candidates JSON");
  auto* auto_opt = restore->add_flag("--auto-boundary", auto_boundary, "use boundary injections as candidates");
  pseudo_opt->excludes(auto_opt);
  restore->add_option("--v-i", cfg.v_i, "own variance of restoration factors")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "benchmark over random measurement configurations");
  std::size_t buses = 0;
  double avg_degree = 2.7;
  std::string range = "1.0:2.0", methods = "gbp,oracle";
  bool no_restore = false;
  BenchSpec spec;
  auto* syn = bench->add_option("--synthetic-buses", buses, "synthetic network size");
  auto* case_opt = bench->add_option("--case", cfg.case_path, "network JSON instead of a synthetic one");
  syn->excludes(case_opt);
  bench->add_option("--avg-degree", avg_degree);
  bench->add_option("--configs", spec.configs)->required();
  bench->add_option("--redundancy", range, "LO:HI");
  bench->add_option("--methods", methods, "comma list of gbp,topological,oracle");
  bench->add_option("--seed", spec.seed, "master seed");
  bench->add_option("--workers", cfg.workers)->check(CLI::PositiveNumber);
  bench->add_option("--oracle-cap", spec.oracle_cap, "skip the oracle above this many buses");
  bench->add_flag("--no-restore", no_restore);
  bench->add_option("--csv", cfg.csv_path);
  bench->add_option("--summary", cfg.summary_path);
  add_sweep_options(bench, cfg, probe, "--probe-seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Ok : BadInput;
  }
  cfg.probe.policy = probe == "random" ? ProbePolicy::SeededRandom : ProbePolicy::LowestId;

  try {
    if (*islands || *restore || *oracle) {
      const auto net = parse_network_file(cfg.case_path);
      const auto ms = parse_measurement_file(cfg.meas_path, net);
      if (*oracle) {
        emit(oracle_report(net, oracle_islands(net, build_jacobian(net, ms)), cfg), cfg.out_path);
        return Ok;
      }
      const DetectionConfig dc{cfg.sweep, cfg.probe};
      if (*islands) {
        emit(islands_report(net, detect_islands(net, ms, dc), cfg), cfg.out_path);
        return Ok;
      }
      if (!auto_boundary && cfg.pseudo_path.empty()) throw InputError("restore needs --pseudo or --auto-boundary");
      std::optional<MeasurementSet> pseudo;
      if (!auto_boundary) {
        pseudo = parse_measurement_file(cfg.pseudo_path, net);
        cfg.candidate_order = "file";
      }
      const auto rep = run_restoration(net, ms, pseudo, dc, RestorationConfig{cfg.sweep, cfg.v_i});
      emit(restore_report(net, rep, cfg), cfg.out_path);
      if (rep.exhausted) {
        std::cerr << "candidates exhausted with w = " << rep.result.final_w << '\n';
        return Exhausted;
      }
      return Ok;
    }

    // bench
    std::tie(spec.redundancy_lo, spec.redundancy_hi) = parse_range(range);
    spec.restore = !no_restore;
    spec.methods.clear();
    std::stringstream ss(methods);
    for (std::string m; std::getline(ss, m, ',');) spec.methods.push_back(parse_method(m));
    if (cfg.case_path.empty() && buses == 0) throw InputError("bench needs --synthetic-buses or --case");
    const auto net = cfg.case_path.empty() ? make_synthetic_network(buses, avg_degree, spec.seed)
                                           : parse_network_file(cfg.case_path);
    const auto records = run_benchmark(net, spec, cfg);
    if (cfg.csv_path.empty() || cfg.csv_path == "-") {
      write_csv(std::cout, records);
    } else {
      std::ofstream f(cfg.csv_path);
      if (!f) throw InputError("cannot write " + cfg.csv_path);
      write_csv(f, records);
    }
    if (!cfg.summary_path.empty()) emit(bench_summary(records, spec, cfg), cfg.summary_path);
    return Ok;
  } catch (const AmbiguousConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Ambiguous;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return BadInput;
  } catch (const NegativeW& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return BadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return BadInput;
  }
}
