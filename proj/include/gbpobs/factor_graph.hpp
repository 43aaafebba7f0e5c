#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbpobs/network.hpp"
#include "gbpobs/variance.hpp"

namespace gbpobs {

struct SweepConfig {
  double v_init = 1.0;
  VarianceLimits limits{};  // V_zero, V_inf
  double v_low = 1e-4;
  double v_high = 1e8;
  double epsilon = 1e-9;
  int tau_max = 1000;
  int growth_window = 5;
  /// Worker threads for a single sweep; graphs below a few thousand edges
  /// always run on the calling thread.
  int threads = 1;
};

enum class VarianceClass { Observable, Unobservable, Ambiguous };
const char* to_string(VarianceClass c);

/// Bipartite variable/factor graph with one virtual factor per variable.
///
/// Edges are numbered factor-major: the edges of factor f are
/// [factor_begin(f), factor_begin(f+1)). Each variable additionally lists
/// its incident edge ids.
class FactorGraph {
 public:
  FactorGraph() = default;
  FactorGraph(std::size_t n_vars, const std::vector<std::vector<std::int32_t>>& factor_vars,
              std::vector<std::optional<ExtendedVariance>> own = {});

  std::size_t variable_count() const { return var_begin_.size() - 1; }
  std::size_t factor_count() const { return factor_begin_.size() - 1; }
  std::size_t edge_count() const { return edge_var_.size(); }

  std::size_t factor_begin(std::size_t f) const { return factor_begin_[f]; }
  std::span<const std::int32_t> factor_variables(std::size_t f) const {
    return {edge_var_.data() + factor_begin_[f], edge_var_.data() + factor_begin_[f + 1]};
  }
  std::span<const std::int32_t> variable_edges(std::size_t x) const {
    return {var_edges_.data() + var_begin_[x], var_edges_.data() + var_begin_[x + 1]};
  }
  std::int32_t edge_variable(std::size_t e) const { return edge_var_[e]; }
  std::int32_t edge_factor(std::size_t e) const { return edge_factor_[e]; }
  /// The edge joining f and x, or -1.
  std::int64_t find_edge(std::size_t f, std::size_t x) const;

  std::optional<ExtendedVariance> own_variance(std::size_t f) const { return own_[f]; }
  void set_own_variance(std::size_t f, std::optional<ExtendedVariance> v) { own_[f] = v; }
  ExtendedVariance virtual_variance(std::size_t x) const { return virtual_[x]; }
  void set_virtual_variance(std::size_t x, ExtendedVariance v) { virtual_[x] = v; }

 private:
  std::vector<std::size_t> factor_begin_{0};
  std::vector<std::int32_t> edge_var_;
  std::vector<std::int32_t> edge_factor_;
  std::vector<std::size_t> var_begin_{0};
  std::vector<std::int32_t> var_edges_;
  std::vector<std::optional<ExtendedVariance>> own_;
  std::vector<ExtendedVariance> virtual_;
};

/// Double-buffered message store, indexed by edge.
struct MessageState {
  std::vector<ExtendedVariance> f2x, x2f;
  std::vector<ExtendedVariance> f2x_prev, x2f_prev;
  /// Consecutive sweeps over which a message strictly increased.
  std::vector<std::uint16_t> f2x_rise, x2f_rise;
  /// Marginals as of the last variable half-sweep, with their rise streaks.
  std::vector<ExtendedVariance> marginal;
  std::vector<std::uint16_t> marginal_rise;
  int tau = 0;
  bool converged = false;
  std::uint64_t messages_last_sweep = 0;
  std::uint64_t messages_total = 0;
};

/// One factor per row, no own variance, every virtual factor INFINITE.
FactorGraph build_detection_graph(const SparseJacobian& j_kept);

/// Variable-to-factor messages at v_init, factor messages INFINITE, marginals
/// equal to the virtual factors.
MessageState initial_state(const FactorGraph& g, const SweepConfig& cfg);

/// Runs flooding sweeps (factor half, then variable half reading the fresh
/// factor messages) until every message and every marginal has settled or
/// tau_max is reached.
///
/// A value is settled when its tag is ZERO/INFINITE and unchanged, when it
/// is FINITE with relative change <= epsilon, or when it is FINITE, at least
/// v_high and has risen for growth_window consecutive sweeps.
MessageState run_sweeps(const FactorGraph& g, MessageState s, const SweepConfig& cfg);

/// Parallel combination of all factor messages and the virtual factor.
std::vector<ExtendedVariance> marginal_variances(const FactorGraph& g, const MessageState& s,
                                                const VarianceLimits& limits = {});

/// ZERO and FINITE below v_high are observable; INFINITE, or FINITE at or
/// above v_high while rising, is unobservable; FINITE at or above v_high
/// without a rise is ambiguous.
VarianceClass classify_variance(ExtendedVariance v, bool rising, const SweepConfig& cfg);

/// Per-variable classification from the state's marginals and trends.
std::vector<VarianceClass> classify_marginals(const MessageState& s, const SweepConfig& cfg);

}  // namespace gbpobs
