#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gbpobs/factor_graph.hpp"
#include "gbpobs/islands.hpp"
#include "gbpobs/network.hpp"

namespace gbpobs {

/// A measurement row with its columns merged per island.
struct IslandRow {
  MeasurementId measurement;
  JacobianRow bus_row;
  std::vector<RowEntry> merged;  // column = island index, zero sums dropped
};

/// Island-level factor graph data: islands are the variables (numbered in
/// canonical order), F_c and F_p the factors.
struct ReducedGraph {
  std::size_t island_count = 0;
  std::vector<IslandRow> fc;
  std::vector<IslandRow> fp;
  /// Candidate rows merged but dropped as dependent within F_c.
  std::vector<MeasurementId> fc_redundant;
  /// Inputs touching a single island after merging.
  std::vector<MeasurementId> discarded;
};

struct RestorationProblem {
  std::size_t k = 0;
  std::size_t q = 0;
  std::size_t b = 0;
  std::int64_t w = 0;
  std::size_t h = 0;
  /// Indices into ReducedGraph::fp, in test order.
  std::vector<std::size_t> order;
};

struct RestorationConfig {
  SweepConfig sweep{};
  /// Own variance assigned to F_c and to active pseudo factors.
  double v_i = 1.0;
};

enum class Independence { Independent, Dependent };

struct CandidateTrace {
  MeasurementId measurement;
  ExtendedVariance residual;
  Independence outcome = Independence::Dependent;
  std::size_t slack_island = 0;
  int sweeps = 0;
};

struct RestorationResult {
  std::vector<MeasurementId> accepted;
  std::vector<MeasurementId> rejected_dependent;
  std::int64_t final_w = 0;
  bool certificate = false;
  std::vector<CandidateTrace> trace;
  /// ReducedGraph::fp indices of the accepted candidates.
  std::vector<std::size_t> accepted_index;
};

class NegativeW : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CandidatesExhausted : public std::runtime_error {
 public:
  explicit CandidatesExhausted(RestorationResult partial);
  const RestorationResult& partial() const { return partial_; }

 private:
  RestorationResult partial_;
};

/// Merges `candidates` (rejected and dropped rows) and `pseudo` per island,
/// keeps a merged-independent F_c and computes q and w. Islands are
/// renumbered by smallest member bus id.
std::pair<ReducedGraph, RestorationProblem> partition_candidates(const PowerNetwork& network,
                                                                 const IslandPartition& partition,
                                                                 std::span<const JacobianRow> candidates,
                                                                 std::span<const JacobianRow> pseudo);

/// Residual test for fp[candidate] against F_c and the accepted set.
/// The lowest incident island is the pass slack.
CandidateTrace test_independence(const ReducedGraph& rg, std::span<const std::size_t> accepted, std::size_t candidate,
                                 const RestorationConfig& cfg);

/// Walks the candidate order until w reaches zero. Throws
/// CandidatesExhausted when the order runs out first. `certificate` is left
/// false; verify_full_observability fills it in.
RestorationResult restore_observability(const ReducedGraph& rg, const RestorationProblem& prob,
                                        const RestorationConfig& cfg);

/// Exact rank of all stacked rows equals n - 1.
bool verify_full_observability(const SparseJacobian& j_kept, std::span<const JacobianRow> fc,
                               std::span<const JacobianRow> accepted);

struct RestorationReport {
  DetectionResult detection;
  ReducedGraph reduced;
  RestorationProblem problem;
  RestorationResult result;
  /// Candidate order ran out before w reached zero; `result` is partial.
  bool exhausted = false;
};

/// Candidate partitioning, restoration and certificate for a finished
/// detection on `j`.
RestorationReport restore_after_detection(const PowerNetwork& network, const SparseJacobian& j, DetectionResult detection,
                                          const std::optional<MeasurementSet>& pseudo, const RestorationConfig& cfg);

/// Detection, candidate partitioning, restoration and certificate in one go.
/// With `pseudo` absent the boundary candidates of the detected partition are
/// used. Exhaustion sets `exhausted` instead of throwing; the certificate is
/// computed either way.
RestorationReport run_restoration(const PowerNetwork& network, const MeasurementSet& ms,
                                  const std::optional<MeasurementSet>& pseudo, const DetectionConfig& detect,
                                  const RestorationConfig& cfg);

}  // namespace gbpobs
