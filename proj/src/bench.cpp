#include "gbpobs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "gbpobs/oracle.hpp"
#include "gbpobs/random.hpp"
#include "gbpobs/restoration.hpp"

namespace gbpobs {

PowerNetwork make_synthetic_network(std::size_t buses, double avg_degree, std::uint64_t seed) {
  if (buses < 2) throw InputError("synthetic network needs at least 2 buses");
  if (!(avg_degree >= 1.0)) throw InputError("average degree must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> ids(buses);
  for (std::size_t i = 0; i < buses; ++i) ids[i] = static_cast<std::int64_t>(i) + 1;

  std::vector<PowerNetwork::BranchSpec> br;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  auto add = [&](std::size_t a, std::size_t b) {
    br.push_back({static_cast<std::int64_t>(br.size()) + 1, ids[a], ids[b]});
  };
  for (std::size_t i = 1; i < buses; ++i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    seen.insert({j, i});
    add(j, i);
  }
  const double complete = static_cast<double>(buses) * static_cast<double>(buses - 1) / 2.0;
  const auto target = static_cast<std::size_t>(
      std::min(complete, static_cast<double>(std::llround(avg_degree * static_cast<double>(buses) / 2.0))));
  while (br.size() < target) {
    auto a = static_cast<std::size_t>(uniform_below(rng, buses));
    auto b = static_cast<std::size_t>(uniform_below(rng, buses));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    add(a, b);
  }
  std::ostringstream name;
  name << "synthetic-" << buses << "-" << avg_degree << "-" << seed;
  return PowerNetwork(std::move(ids), br, std::nullopt, name.str());
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Gbp: return "gbp";
    case Method::Topological: return "topological";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "gbp") return Method::Gbp;
  if (s == "topological") return Method::Topological;
  if (s == "oracle") return Method::Oracle;
  throw InputError("unknown method '" + s + "'");
}

std::uint64_t config_seed(std::uint64_t master, std::size_t i) {
  // splitmix64
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point t0) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
  return std::max<std::int64_t>(1, ns);
}

std::vector<BenchRecord> run_config(const PowerNetwork& net, const BenchSpec& spec, const RunConfig& cfg,
                                    std::size_t index) {
  const std::uint64_t seed = config_seed(spec.seed, index);
  std::mt19937_64 rng(seed);
  const std::size_t n = net.bus_count();
  // cap at the size of the device pool
  std::size_t pool = 2 * net.branch_count();
  for (BusIndex b = 0; b < static_cast<BusIndex>(n); ++b) pool += net.degree(b) > 0;
  double red = spec.redundancy_lo + uniform_unit(rng) * (spec.redundancy_hi - spec.redundancy_lo);
  red = std::min(red, static_cast<double>(pool) / static_cast<double>(n - 1));

  BenchRecord base;
  base.network = net.name();
  base.seed = seed;
  base.redundancy = red;

  const auto ms = generate_measurement_config(net, red, rng());
  const auto j = build_jacobian(net, ms);

  const bool want_oracle = n <= spec.oracle_cap &&
                           std::find(spec.methods.begin(), spec.methods.end(), Method::Oracle) != spec.methods.end();
  std::optional<IslandPartition> truth;
  std::int64_t oracle_ns = 0;
  if (want_oracle) {
    const auto t0 = Clock::now();
    truth = oracle_islands(net, j);
    oracle_ns = elapsed_ns(t0);
  }
  auto agrees = [&](const IslandPartition& p) -> std::optional<bool> {
    if (!truth) return std::nullopt;
    return partitions_equal(p, *truth);
  };

  std::vector<BenchRecord> out;
  for (auto m : spec.methods) {
    BenchRecord r = base;
    r.method = m;
    switch (m) {
      case Method::Oracle:
        if (!truth) continue;
        r.k = static_cast<std::int64_t>(truth->size());
        r.wall_ns = oracle_ns;
        break;
      case Method::Topological: {
        const auto t0 = Clock::now();
        const auto p = topological_islands(net, ms);
        r.wall_ns = elapsed_ns(t0);
        r.k = static_cast<std::int64_t>(p.size());
        r.agrees_oracle = agrees(p);
        break;
      }
      case Method::Gbp: {
        const DetectionConfig dc{cfg.sweep, cfg.probe};
        std::optional<DetectionResult> det;
        const auto t0 = Clock::now();
        try {
          det = detect_islands(j, dc);
        } catch (const AmbiguousConvergence&) {
        }
        r.wall_ns = elapsed_ns(t0);
        if (!det) {
          r.k = -1;
          if (truth) r.agrees_oracle = false;
          break;
        }
        r.k = static_cast<std::int64_t>(det->partition.size());
        for (auto s : det->partition.sweeps) r.sweeps += s;
        r.agrees_oracle = agrees(det->partition);
        if (spec.restore && r.k >= 2) {
          try {
            const auto rep = restore_after_detection(net, j, std::move(*det), std::nullopt, {cfg.sweep, cfg.v_i});
            r.w = rep.problem.w;
            r.accepted = static_cast<std::int64_t>(rep.result.accepted.size());
            r.certificate = rep.result.certificate;
          } catch (const std::exception&) {
            r.certificate = false;
          }
        }
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(const PowerNetwork& network, const BenchSpec& spec, const RunConfig& cfg) {
  if (network.bus_count() < 2) throw InputError("benchmark network needs at least 2 buses");
  std::vector<std::vector<BenchRecord>> per(spec.configs);
  const auto workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < spec.configs;) {
      try {
        per[i] = run_config(network, spec, cfg, i);
      } catch (const std::exception&) {
        BenchRecord r;
        r.network = network.name();
        r.seed = config_seed(spec.seed, i);
        r.k = -1;
        r.wall_ns = 1;
        per[i].push_back(r);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  std::vector<BenchRecord> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.seed, a.method) < std::tie(b.seed, b.method);
  });
  return out;
}

const std::string& csv_header() {
  static const std::string h = "network,seed,redundancy,k,method,wall_ns,sweeps,agrees_oracle,w,accepted,certificate";
  return h;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <class T>
T parse_num(const std::string& s, const char* field) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw InputError(std::string("bad CSV field ") + field + ": '" + s + "'");
  return v;
}

std::optional<bool> parse_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw InputError("bad CSV flag '" + s + "'");
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool in_q = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_q) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += c, ++i;
      else if (c == '"') in_q = false;
      else out.back() += c;
    } else if (c == '"') {
      in_q = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

std::string to_csv_row(const BenchRecord& r) {
  auto flag = [](const std::optional<bool>& b) { return b ? std::string(*b ? "1" : "0") : std::string(); };
  auto num = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  std::string s = quote(r.network);
  s += ',' + std::to_string(r.seed);
  s += ',' + fmt_double(r.redundancy);
  s += ',' + std::to_string(r.k);
  s += ',' + std::string(to_string(r.method));
  s += ',' + std::to_string(r.wall_ns);
  s += ',' + std::to_string(r.sweeps);
  s += ',' + flag(r.agrees_oracle);
  s += ',' + num(r.w);
  s += ',' + num(r.accepted);
  s += ',' + flag(r.certificate);
  return s;
}

BenchRecord parse_csv_row(const std::string& line) {
  auto f = split_csv(line);
  if (!f.empty() && !f.back().empty() && f.back().back() == '\r') f.back().pop_back();
  if (f.size() != 11) throw InputError("CSV row has " + std::to_string(f.size()) + " fields, expected 11");
  BenchRecord r;
  r.network = f[0];
  r.seed = parse_num<std::uint64_t>(f[1], "seed");
  r.redundancy = parse_num<double>(f[2], "redundancy");
  r.k = parse_num<std::int64_t>(f[3], "k");
  r.method = parse_method(f[4]);
  r.wall_ns = parse_num<std::int64_t>(f[5], "wall_ns");
  r.sweeps = parse_num<std::int64_t>(f[6], "sweeps");
  r.agrees_oracle = parse_flag(f[7]);
  if (!f[8].empty()) r.w = parse_num<std::int64_t>(f[8], "w");
  if (!f[9].empty()) r.accepted = parse_num<std::int64_t>(f[9], "accepted");
  r.certificate = parse_flag(f[10]);
  return r;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << csv_header() << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw InputError("unexpected CSV header");
  std::vector<BenchRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_csv_row(line));
  return out;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BinStats normalized_time_stats(const std::vector<BenchRecord>& records, Method method, std::int64_t lo, std::int64_t hi) {
  struct Row {
    const BenchRecord* gbp = nullptr;
    const BenchRecord* oracle = nullptr;
    const BenchRecord* target = nullptr;
  };
  std::map<std::pair<std::string, std::uint64_t>, Row> by;
  for (const auto& r : records) {
    auto& row = by[{r.network, r.seed}];
    if (r.method == Method::Gbp) row.gbp = &r;
    if (r.method == Method::Oracle) row.oracle = &r;
    if (r.method == method) row.target = &r;
  }
  std::vector<double> ratio;
  for (const auto& [key, row] : by) {
    if (!row.gbp || !row.target || row.gbp->k < 0 || row.target->k < 0) continue;
    const auto k = row.oracle ? row.oracle->k : row.gbp->k;
    if (k < lo || k > hi) continue;
    ratio.push_back(static_cast<double>(row.target->wall_ns) / static_cast<double>(row.gbp->wall_ns));
  }
  BinStats s;
  s.count = ratio.size();
  if (ratio.empty()) return s;
  std::sort(ratio.begin(), ratio.end());
  s.q1 = quantile(ratio, 0.25);
  s.median = quantile(ratio, 0.5);
  s.q3 = quantile(ratio, 0.75);
  return s;
}

}  // namespace gbpobs
