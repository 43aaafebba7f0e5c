#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "gbpobs/factor_graph.hpp"
#include "gbpobs/network.hpp"

namespace gbpobs {

/// Disjoint cover of the buses by observable islands.
struct IslandPartition {
  /// Member bus indices, ascending within an island, islands in discovery order.
  std::vector<std::vector<BusIndex>> islands;
  /// Probe bus of each pass (empty for partitions that were not probed).
  std::vector<BusIndex> probes;
  /// Sweeps run in each pass.
  std::vector<int> sweeps;

  std::size_t size() const { return islands.size(); }
  std::size_t pass_count() const { return probes.size(); }
  /// island number per bus index
  std::vector<std::int32_t> island_of(std::size_t n_buses) const;
};

/// Builds a partition from an island number per bus (numbers need not be dense).
IslandPartition partition_from_labels(std::span<const std::int32_t> label);

/// Islands as bus ids, each sorted, ordered by smallest member id.
std::vector<std::vector<std::int64_t>> canonical_islands(const PowerNetwork& network, const IslandPartition& p);

/// Set-of-sets equality; throws std::invalid_argument when the two do not
/// cover the same buses.
bool partitions_equal(const IslandPartition& a, const IslandPartition& b);

enum class ProbePolicy { LowestId, SeededRandom };

struct ProbeConfig {
  ProbePolicy policy = ProbePolicy::LowestId;
  std::uint64_t seed = 0;
};

struct DetectionConfig {
  SweepConfig sweep{};
  ProbeConfig probe{};
};

/// Raised when a pass ends with a variable that cannot be classified.
class AmbiguousConvergence : public std::runtime_error {
 public:
  AmbiguousConvergence(std::size_t pass, BusIndex bus);
  std::size_t pass() const { return pass_; }
  BusIndex bus() const { return bus_; }

 private:
  std::size_t pass_;
  BusIndex bus_;
};

/// Picks the probe among `remaining` (global indices). `rng` is only drawn
/// from under SeededRandom.
BusIndex select_probe(std::span<const BusIndex> remaining, ProbePolicy policy, std::mt19937_64& rng);

struct PeelResult {
  FactorGraph graph;
  std::vector<std::int32_t> variables;  // old variable index per new one
  std::vector<std::int32_t> factors;    // old factor index per new one
  std::vector<std::int32_t> dropped;    // old factors touching an observed variable
};

/// Removes the observed variables and every factor touching one. Surviving
/// virtual factors are reset to INFINITE, own variances carry over.
PeelResult peel_subgraph(const FactorGraph& g, std::span<const char> observed);

struct DetectionResult {
  IslandPartition partition;
  /// Rows of the Jacobian kept as independent, and the rest.
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> rejected_rows;
  /// Kept rows removed by peeling that end up spanning several islands.
  std::vector<std::size_t> dropped_rows;
  std::vector<MeasurementId> rejected;
  std::vector<MeasurementId> dropped;
  std::uint64_t message_updates = 0;
};

DetectionResult detect_islands(const PowerNetwork& network, const MeasurementSet& ms, const DetectionConfig& cfg = {});
DetectionResult detect_islands(const SparseJacobian& j, const DetectionConfig& cfg = {});

}  // namespace gbpobs
