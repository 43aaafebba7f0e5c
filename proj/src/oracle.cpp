#include "gbpobs/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "gbpobs/exact_linalg.hpp"

namespace gbpobs {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }
  std::vector<std::int32_t> labels() {
    std::vector<std::int32_t> out(parent_.size());
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = static_cast<std::int32_t>(find(x));
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<char> branches_in_span(const PowerNetwork& network, IncrementalEchelon& ech) {
  std::vector<char> out(network.branch_count(), 0);
  for (std::size_t b = 0; b < network.branch_count(); ++b) {
    const auto& br = network.branch(b);
    std::vector<RowEntry> diff{{br.from, 1}, {br.to, -1}};
    if (diff[1].column < diff[0].column) std::swap(diff[0], diff[1]);
    out[b] = ech.in_span(diff) ? 1 : 0;
  }
  return out;
}

/// Bus of an injection row with three or more entries, else -1. Shorter
/// rows make their own branch observable, so they never get removed and may
/// be treated like flows.
BusIndex injection_bus(const JacobianRow& row) {
  if (row.entries.size() < 3) return -1;
  for (const auto& e : row.entries)
    if (e.coefficient > 0) return e.column;
  return -1;
}

}  // namespace

std::vector<char> observable_branches(const PowerNetwork& network, const SparseJacobian& j) {
  IncrementalEchelon ech(j.cols());
  for (const auto& row : j.row_list()) ech.insert(row.entries);
  return branches_in_span(network, ech);
}

IslandPartition oracle_islands(const PowerNetwork& network, const SparseJacobian& j) {
  std::vector<char> active(j.rows(), 1);
  std::vector<BusIndex> inj(j.rows());
  for (std::size_t r = 0; r < j.rows(); ++r) inj[r] = injection_bus(j.row(r));

  std::vector<char> obs;
  for (;;) {
    IncrementalEchelon ech(j.cols());
    for (std::size_t r = 0; r < j.rows(); ++r)
      if (active[r]) ech.insert(j.row(r).entries);
    obs = branches_in_span(network, ech);
    bool removed = false;
    for (std::size_t r = 0; r < j.rows(); ++r) {
      if (!active[r] || inj[r] < 0) continue;
      const auto inc = network.incident_branches(inj[r]);
      if (std::any_of(inc.begin(), inc.end(), [&](auto b) { return !obs[static_cast<std::size_t>(b)]; })) {
        active[r] = 0;
        removed = true;
      }
    }
    if (!removed) break;
  }

  UnionFind uf(network.bus_count());
  for (std::size_t b = 0; b < network.branch_count(); ++b)
    if (obs[b]) uf.unite(static_cast<std::size_t>(network.branch(b).from), static_cast<std::size_t>(network.branch(b).to));
  const auto labels = uf.labels();
  return partition_from_labels(labels);
}

IslandPartition topological_islands(const PowerNetwork& network, const MeasurementSet& ms) {
  UnionFind uf(network.bus_count());
  std::vector<BusIndex> injections;
  for (const auto& m : ms.measurements) {
    if (m.kind == MeasurementKind::Flow) {
      const auto& br = network.branch(m.branch);
      uf.unite(static_cast<std::size_t>(br.from), static_cast<std::size_t>(br.to));
    } else {
      injections.push_back(m.bus);
    }
  }
  std::vector<char> spent(injections.size(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < injections.size(); ++k) {
      if (spent[k]) continue;
      const BusIndex bus = injections[k];
      const auto home = uf.find(static_cast<std::size_t>(bus));
      std::size_t foreign = SIZE_MAX;
      bool reducible = true;
      for (auto b : network.incident_branches(bus)) {
        const auto other = uf.find(static_cast<std::size_t>(network.other_end(static_cast<std::size_t>(b), bus)));
        if (other == home) continue;
        if (foreign == SIZE_MAX) foreign = other;
        else if (foreign != other) reducible = false;
      }
      if (!reducible) continue;
      if (foreign != SIZE_MAX) {
        uf.unite(home, foreign);
        changed = true;
      }
      spent[k] = 1;
    }
  }
  const auto labels = uf.labels();
  return partition_from_labels(labels);
}

bool is_refinement(const IslandPartition& fine, const IslandPartition& coarse) {
  std::size_t n = 0;
  for (const auto& island : coarse.islands) n += island.size();
  const auto label = coarse.island_of(n);
  for (const auto& island : fine.islands)
    for (auto b : island)
      if (label.at(static_cast<std::size_t>(b)) != label.at(static_cast<std::size_t>(island.front()))) return false;
  return true;
}

}  // namespace gbpobs
