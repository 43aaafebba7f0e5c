#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gbpobs/factor_graph.hpp"
#include "gbpobs/islands.hpp"
#include "gbpobs/network.hpp"

namespace gbpobs {

/// Everything needed to reproduce a run; embedded in every report.
struct RunConfig {
  SweepConfig sweep{};
  ProbeConfig probe{};
  /// "boundary" (ascending bus id) or "file" (pseudo file order).
  std::string candidate_order = "boundary";
  double v_i = 1.0;
  std::string case_path, meas_path, pseudo_path, out_path, csv_path, summary_path;
  int workers = 1;
};

/// Random spanning tree (each new bus attaches to a uniformly chosen earlier
/// one) plus distinct extra branches until round(avg_degree * buses / 2)
/// branches exist. Bus ids are 1..buses, branch ids 1..m.
PowerNetwork make_synthetic_network(std::size_t buses, double avg_degree, std::uint64_t seed);

enum class Method { Gbp, Topological, Oracle };
const char* to_string(Method m);
Method parse_method(const std::string& s);

struct BenchRecord {
  std::string network;
  std::uint64_t seed = 0;
  double redundancy = 0.0;
  /// Island count found by the method, -1 when the method failed.
  std::int64_t k = 0;
  Method method = Method::Gbp;
  std::int64_t wall_ns = 0;
  std::int64_t sweeps = 0;
  std::optional<bool> agrees_oracle;
  std::optional<std::int64_t> w;
  std::optional<std::int64_t> accepted;
  std::optional<bool> certificate;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct BenchSpec {
  std::size_t configs = 0;
  double redundancy_lo = 1.0;
  double redundancy_hi = 2.0;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Gbp, Method::Oracle};
  /// Oracle skipped on networks with more buses than this.
  std::size_t oracle_cap = 20000;
  /// Run restoration for gbp rows with k >= 2 (untimed).
  bool restore = true;
};

/// Seed of config i under a master seed.
std::uint64_t config_seed(std::uint64_t master, std::size_t i);

/// One record per (config, method), sorted by (seed, method). Identical for
/// any worker count.
std::vector<BenchRecord> run_benchmark(const PowerNetwork& network, const BenchSpec& spec, const RunConfig& cfg);

const std::string& csv_header();
std::string to_csv_row(const BenchRecord& r);
BenchRecord parse_csv_row(const std::string& line);
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_csv(std::istream& in);

struct BinStats {
  std::size_t count = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
};

/// Quartiles of t_method / t_gbp per config for records whose k (taken from
/// the oracle row when present, else the gbp row) lies in [lo, hi].
BinStats normalized_time_stats(const std::vector<BenchRecord>& records, Method method, std::int64_t lo, std::int64_t hi);

}  // namespace gbpobs
