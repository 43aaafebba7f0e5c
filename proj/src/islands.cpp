#include "gbpobs/islands.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "gbpobs/exact_linalg.hpp"
#include "gbpobs/random.hpp"

namespace gbpobs {

std::vector<std::int32_t> IslandPartition::island_of(std::size_t n_buses) const {
  std::vector<std::int32_t> label(n_buses, -1);
  for (std::size_t i = 0; i < islands.size(); ++i)
    for (auto b : islands[i]) label.at(static_cast<std::size_t>(b)) = static_cast<std::int32_t>(i);
  return label;
}

IslandPartition partition_from_labels(std::span<const std::int32_t> label) {
  IslandPartition p;
  std::unordered_map<std::int32_t, std::size_t> slot;
  for (std::size_t b = 0; b < label.size(); ++b) {
    auto [it, fresh] = slot.try_emplace(label[b], p.islands.size());
    if (fresh) p.islands.emplace_back();
    p.islands[it->second].push_back(static_cast<BusIndex>(b));
  }
  return p;
}

std::vector<std::vector<std::int64_t>> canonical_islands(const PowerNetwork& network, const IslandPartition& p) {
  std::vector<std::vector<std::int64_t>> out;
  out.reserve(p.islands.size());
  for (const auto& island : p.islands) {
    auto& ids = out.emplace_back();
    for (auto b : island) ids.push_back(network.bus_id(b));
    std::sort(ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

namespace {

std::vector<std::int32_t> labels_checked(const IslandPartition& p, std::size_t n) {
  std::vector<std::int32_t> label(n, -1);
  for (std::size_t i = 0; i < p.islands.size(); ++i) {
    if (p.islands[i].empty()) throw std::invalid_argument("empty island");
    for (auto b : p.islands[i]) {
      if (b < 0 || static_cast<std::size_t>(b) >= n || label[static_cast<std::size_t>(b)] != -1)
        throw std::invalid_argument("partitions cover different bus sets");
      label[static_cast<std::size_t>(b)] = static_cast<std::int32_t>(i);
    }
  }
  return label;
}

std::size_t member_count(const IslandPartition& p) {
  std::size_t n = 0;
  for (const auto& island : p.islands) n += island.size();
  return n;
}

}  // namespace

bool partitions_equal(const IslandPartition& a, const IslandPartition& b) {
  const std::size_t n = member_count(a);
  if (member_count(b) != n) throw std::invalid_argument("partitions cover different bus sets");
  const auto la = labels_checked(a, n), lb = labels_checked(b, n);
  if (a.islands.size() != b.islands.size()) return false;
  std::vector<std::int32_t> a_to_b(a.islands.size(), -1);
  for (std::size_t x = 0; x < n; ++x) {
    auto& m = a_to_b[static_cast<std::size_t>(la[x])];
    if (m == -1) m = lb[x];
    else if (m != lb[x]) return false;
  }
  return true;
}

AmbiguousConvergence::AmbiguousConvergence(std::size_t pass, BusIndex bus)
    : std::runtime_error("ambiguous convergence in pass " + std::to_string(pass) + " at bus index " +
                         std::to_string(bus)),
      pass_(pass),
      bus_(bus) {}

BusIndex select_probe(std::span<const BusIndex> remaining, ProbePolicy policy, std::mt19937_64& rng) {
  if (remaining.empty()) throw std::invalid_argument("no variables left to probe");
  if (policy == ProbePolicy::SeededRandom) return remaining[uniform_below(rng, remaining.size())];
  return *std::min_element(remaining.begin(), remaining.end());
}

PeelResult peel_subgraph(const FactorGraph& g, std::span<const char> observed) {
  PeelResult out;
  std::vector<std::int32_t> local(g.variable_count(), -1);
  for (std::size_t x = 0; x < g.variable_count(); ++x) {
    if (observed[x]) continue;
    local[x] = static_cast<std::int32_t>(out.variables.size());
    out.variables.push_back(static_cast<std::int32_t>(x));
  }
  std::vector<std::vector<std::int32_t>> fv;
  std::vector<std::optional<ExtendedVariance>> own;
  for (std::size_t f = 0; f < g.factor_count(); ++f) {
    const auto vars = g.factor_variables(f);
    const bool touches = std::any_of(vars.begin(), vars.end(), [&](auto x) { return observed[static_cast<std::size_t>(x)]; });
    if (touches) {
      out.dropped.push_back(static_cast<std::int32_t>(f));
      continue;
    }
    auto& row = fv.emplace_back();
    for (auto x : vars) row.push_back(local[static_cast<std::size_t>(x)]);
    own.push_back(g.own_variance(f));
    out.factors.push_back(static_cast<std::int32_t>(f));
  }
  out.graph = FactorGraph(out.variables.size(), fv, std::move(own));
  return out;
}

DetectionResult detect_islands(const PowerNetwork& network, const MeasurementSet& ms, const DetectionConfig& cfg) {
  return detect_islands(build_jacobian(network, ms), cfg);
}

DetectionResult detect_islands(const SparseJacobian& j, const DetectionConfig& cfg) {
  DetectionResult out;
  // sparsest rows first, ties by position
  std::vector<std::size_t> order(j.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return j.row(a).entries.size() < j.row(b).entries.size(); });
  const auto split = independent_row_subset(j.select(order));
  for (auto r : split.kept) out.kept_rows.push_back(order[r]);
  for (auto r : split.rejected) out.rejected_rows.push_back(order[r]);
  std::sort(out.kept_rows.begin(), out.kept_rows.end());
  std::sort(out.rejected_rows.begin(), out.rejected_rows.end());

  FactorGraph g = build_detection_graph(j.select(out.kept_rows));
  std::vector<BusIndex> globals(j.cols());
  for (std::size_t x = 0; x < globals.size(); ++x) globals[x] = static_cast<BusIndex>(x);
  std::vector<std::int32_t> factor_row(out.kept_rows.begin(), out.kept_rows.end());
  std::vector<std::size_t> peeled;

  std::mt19937_64 rng(cfg.probe.seed);
  auto& part = out.partition;
  while (g.variable_count() > 0) {
    const BusIndex probe = select_probe(globals, cfg.probe.policy, rng);
    const auto probe_local = static_cast<std::size_t>(std::lower_bound(globals.begin(), globals.end(), probe) - globals.begin());
    g.set_virtual_variance(probe_local, ExtendedVariance::zero());

    auto s = run_sweeps(g, initial_state(g, cfg.sweep), cfg.sweep);
    out.message_updates += s.messages_total;
    const auto cls = classify_marginals(s, cfg.sweep);

    std::vector<char> observed(g.variable_count(), 0);
    auto& island = part.islands.emplace_back();
    for (std::size_t x = 0; x < cls.size(); ++x) {
      if (cls[x] == VarianceClass::Ambiguous) throw AmbiguousConvergence(part.probes.size() + 1, globals[x]);
      if (cls[x] == VarianceClass::Observable) {
        observed[x] = 1;
        island.push_back(globals[x]);
      }
    }
    part.probes.push_back(probe);
    part.sweeps.push_back(s.tau);

    auto peel = peel_subgraph(g, observed);
    for (auto f : peel.dropped) peeled.push_back(static_cast<std::size_t>(factor_row[static_cast<std::size_t>(f)]));
    std::vector<BusIndex> next_globals;
    next_globals.reserve(peel.variables.size());
    for (auto x : peel.variables) next_globals.push_back(globals[static_cast<std::size_t>(x)]);
    std::vector<std::int32_t> next_rows;
    next_rows.reserve(peel.factors.size());
    for (auto f : peel.factors) next_rows.push_back(factor_row[static_cast<std::size_t>(f)]);
    globals = std::move(next_globals);
    factor_row = std::move(next_rows);
    g = std::move(peel.graph);
  }

  const auto label = part.island_of(j.cols());
  std::sort(peeled.begin(), peeled.end());
  for (auto r : peeled) {
    const auto& entries = j.row(r).entries;
    const auto first = label[static_cast<std::size_t>(entries.front().column)];
    const bool spans = std::any_of(entries.begin(), entries.end(),
                                   [&](const RowEntry& e) { return label[static_cast<std::size_t>(e.column)] != first; });
    if (spans) out.dropped_rows.push_back(r);
  }
  for (auto r : out.rejected_rows) out.rejected.push_back(j.row(r).measurement);
  for (auto r : out.dropped_rows) out.dropped.push_back(j.row(r).measurement);
  return out;
}

}  // namespace gbpobs
