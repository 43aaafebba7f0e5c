#include "gbpobs/restoration.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "gbpobs/exact_linalg.hpp"

namespace gbpobs {

CandidatesExhausted::CandidatesExhausted(RestorationResult partial)
    : std::runtime_error("pseudo-measurement candidates exhausted with w = " + std::to_string(partial.final_w)),
      partial_(std::move(partial)) {}

namespace {

std::vector<RowEntry> merge_row(const JacobianRow& row, std::span<const std::int32_t> island_of) {
  std::map<std::int32_t, std::int64_t> sum;
  for (const auto& e : row.entries) sum[island_of[static_cast<std::size_t>(e.column)]] += e.coefficient;
  std::vector<RowEntry> out;
  for (auto [island, c] : sum)
    if (c != 0) out.push_back({island, c});
  return out;
}

}  // namespace

std::pair<ReducedGraph, RestorationProblem> partition_candidates(const PowerNetwork& network,
                                                                 const IslandPartition& partition,
                                                                 std::span<const JacobianRow> candidates,
                                                                 std::span<const JacobianRow> pseudo) {
  const std::size_t n = network.bus_count();
  const std::size_t k = partition.size();

  // canonical island numbering by smallest member bus id
  std::vector<std::int64_t> min_id(k);
  for (std::size_t i = 0; i < k; ++i) {
    min_id[i] = INT64_MAX;
    for (auto b : partition.islands[i]) min_id[i] = std::min(min_id[i], network.bus_id(b));
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return min_id[a] < min_id[b]; });
  std::vector<std::int32_t> island_of(n, -1);
  for (std::size_t rank = 0; rank < k; ++rank)
    for (auto b : partition.islands[order[rank]]) island_of.at(static_cast<std::size_t>(b)) = static_cast<std::int32_t>(rank);
  if (std::find(island_of.begin(), island_of.end(), -1) != island_of.end())
    throw std::invalid_argument("partition does not cover every bus");

  ReducedGraph rg;
  rg.island_count = k;
  IncrementalEchelon ech(k);
  for (const auto& row : candidates) {
    auto merged = merge_row(row, island_of);
    if (merged.size() < 2) {
      rg.discarded.push_back(row.measurement);
      continue;
    }
    if (ech.insert(merged)) rg.fc.push_back({row.measurement, row, std::move(merged)});
    else rg.fc_redundant.push_back(row.measurement);
  }
  for (const auto& row : pseudo) {
    auto merged = merge_row(row, island_of);
    if (merged.size() < 2) {
      rg.discarded.push_back(row.measurement);
      continue;
    }
    rg.fp.push_back({row.measurement, row, std::move(merged)});
  }

  RestorationProblem prob;
  prob.k = k;
  prob.q = rg.fc.size();
  prob.b = rg.fp.size();
  prob.w = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(prob.q) - 1;
  prob.h = n - k;
  prob.order.resize(rg.fp.size());
  std::iota(prob.order.begin(), prob.order.end(), 0);
  if (prob.w < 0) throw NegativeW("merged candidate rows over-determine the island system: k = " + std::to_string(k) +
                                  ", q = " + std::to_string(prob.q));
  return {std::move(rg), std::move(prob)};
}

CandidateTrace test_independence(const ReducedGraph& rg, std::span<const std::size_t> accepted, std::size_t candidate,
                                 const RestorationConfig& cfg) {
  std::vector<std::vector<std::int32_t>> fv;
  auto add = [&](const IslandRow& r) {
    auto& vars = fv.emplace_back();
    for (const auto& e : r.merged) vars.push_back(e.column);
  };
  for (const auto& r : rg.fc) add(r);
  for (auto a : accepted) add(rg.fp.at(a));
  const auto& cand = rg.fp.at(candidate);
  add(cand);

  const auto v = ExtendedVariance::finite(cfg.v_i);
  FactorGraph g(rg.island_count, fv, std::vector<std::optional<ExtendedVariance>>(fv.size(), v));
  CandidateTrace t;
  t.measurement = cand.measurement;
  t.slack_island = static_cast<std::size_t>(cand.merged.front().column);
  g.set_virtual_variance(t.slack_island, ExtendedVariance::zero());

  const auto s = run_sweeps(g, initial_state(g, cfg.sweep), cfg.sweep);
  t.sweeps = s.tau;
  const std::size_t f = fv.size() - 1;
  std::vector<ExtendedVariance> incoming;
  bool rising = false;
  for (std::size_t e = g.factor_begin(f); e < g.factor_begin(f + 1); ++e) {
    incoming.push_back(s.x2f[e]);
    rising = rising || s.x2f_rise[e] >= cfg.sweep.growth_window;
  }
  t.residual = serial_variance(incoming, std::nullopt, cfg.sweep.limits);
  switch (classify_variance(t.residual, rising, cfg.sweep)) {
    case VarianceClass::Unobservable: t.outcome = Independence::Independent; break;
    case VarianceClass::Observable: t.outcome = Independence::Dependent; break;
    case VarianceClass::Ambiguous: throw AmbiguousConvergence(candidate + 1, -1);
  }
  return t;
}

RestorationResult restore_observability(const ReducedGraph& rg, const RestorationProblem& prob,
                                        const RestorationConfig& cfg) {
  if (prob.w < 0) throw NegativeW("negative w");
  RestorationResult res;
  res.final_w = prob.w;
  for (std::size_t pos = 0; pos < prob.order.size() && res.final_w > 0; ++pos) {
    const std::size_t c = prob.order[pos];
    auto t = test_independence(rg, res.accepted_index, c, cfg);
    if (t.outcome == Independence::Independent) {
      res.accepted.push_back(t.measurement);
      res.accepted_index.push_back(c);
      --res.final_w;
    } else {
      res.rejected_dependent.push_back(t.measurement);
    }
    res.trace.push_back(std::move(t));
  }
  if (res.final_w > 0) throw CandidatesExhausted(std::move(res));
  return res;
}

bool verify_full_observability(const SparseJacobian& j_kept, std::span<const JacobianRow> fc,
                               std::span<const JacobianRow> accepted) {
  const std::size_t n = j_kept.cols();
  if (n == 0) return false;
  IncrementalEchelon ech(n);
  for (const auto& r : j_kept.row_list()) ech.insert(r.entries);
  for (const auto& r : fc) ech.insert(r.entries);
  for (const auto& r : accepted) ech.insert(r.entries);
  return ech.rank() == n - 1;
}

RestorationReport restore_after_detection(const PowerNetwork& network, const SparseJacobian& j, DetectionResult detection,
                                          const std::optional<MeasurementSet>& pseudo, const RestorationConfig& cfg) {
  RestorationReport rep;
  rep.detection = std::move(detection);

  std::vector<std::size_t> cand_rows = rep.detection.rejected_rows;
  cand_rows.insert(cand_rows.end(), rep.detection.dropped_rows.begin(), rep.detection.dropped_rows.end());
  std::sort(cand_rows.begin(), cand_rows.end());
  std::vector<JacobianRow> cand;
  for (auto r : cand_rows) cand.push_back(j.row(r));

  const auto label = rep.detection.partition.island_of(network.bus_count());
  const MeasurementSet pool = pseudo ? *pseudo : boundary_pseudo_candidates(network, label);
  std::vector<JacobianRow> prow;
  for (const auto& m : pool.measurements) prow.push_back(jacobian_row(network, m));

  std::tie(rep.reduced, rep.problem) = partition_candidates(network, rep.detection.partition, cand, prow);

  try {
    rep.result = restore_observability(rep.reduced, rep.problem, cfg);
  } catch (const CandidatesExhausted& e) {
    rep.result = e.partial();
    rep.exhausted = true;
  }
  std::vector<JacobianRow> fc_rows, acc_rows;
  for (const auto& r : rep.reduced.fc) fc_rows.push_back(r.bus_row);
  for (auto a : rep.result.accepted_index) acc_rows.push_back(rep.reduced.fp[a].bus_row);
  rep.result.certificate = verify_full_observability(j.select(rep.detection.kept_rows), fc_rows, acc_rows);
  return rep;
}

RestorationReport run_restoration(const PowerNetwork& network, const MeasurementSet& ms,
                                  const std::optional<MeasurementSet>& pseudo, const DetectionConfig& detect,
                                  const RestorationConfig& cfg) {
  const auto j = build_jacobian(network, ms);
  return restore_after_detection(network, j, detect_islands(j, detect), pseudo, cfg);
}

}  // namespace gbpobs
