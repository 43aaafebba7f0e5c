#include "gbpobs/report.hpp"

#include <algorithm>

namespace gbpobs {

Json to_json(const MeasurementId& id) {
  if (id.is_integer()) return id.as_integer();
  return id.to_string();
}

Json to_json(const ExtendedVariance& v) {
  if (v.is_finite()) return v.value();
  return to_string(v.tag());
}

Json to_json(const RunConfig& cfg) {
  const auto& s = cfg.sweep;
  return Json{
      {"v_init", s.v_init},
      {"v_zero", s.limits.zero},
      {"v_low", s.v_low},
      {"v_high", s.v_high},
      {"v_inf", s.limits.infinite},
      {"epsilon", s.epsilon},
      {"tau_max", s.tau_max},
      {"growth_window", s.growth_window},
      {"threads", s.threads},
      {"probe", cfg.probe.policy == ProbePolicy::LowestId ? "lowest" : "random"},
      {"probe_seed", cfg.probe.seed},
      {"candidate_order", cfg.candidate_order},
      {"v_i", cfg.v_i},
      {"case", cfg.case_path},
      {"measurements", cfg.meas_path},
      {"pseudo", cfg.pseudo_path},
      {"out", cfg.out_path},
      {"csv", cfg.csv_path},
      {"summary", cfg.summary_path},
      {"workers", cfg.workers},
  };
}

namespace {

Json ids(const std::vector<MeasurementId>& v) {
  Json a = Json::array();
  for (const auto& id : v) a.push_back(to_json(id));
  return a;
}

Json islands_json(const PowerNetwork& network, const IslandPartition& p) {
  Json a = Json::array();
  for (const auto& island : canonical_islands(network, p)) a.push_back(island);
  return a;
}

}  // namespace

Json islands_report(const PowerNetwork& network, const DetectionResult& det, const RunConfig& cfg) {
  Json probes = Json::array();
  for (auto b : det.partition.probes) probes.push_back(network.bus_id(b));
  return Json{
      {"islands", islands_json(network, det.partition)},
      {"rejected", ids(det.rejected)},
      {"dropped", ids(det.dropped)},
      {"passes", det.partition.pass_count()},
      {"sweeps", det.partition.sweeps},
      {"probes", probes},
      {"message_updates", det.message_updates},
      {"config", to_json(cfg)},
  };
}

Json oracle_report(const PowerNetwork& network, const IslandPartition& p, const RunConfig& cfg) {
  return Json{
      {"islands", islands_json(network, p)},
      {"rejected", Json::array()},
      {"dropped", Json::array()},
      {"passes", 0},
      {"sweeps", Json::array()},
      {"config", to_json(cfg)},
  };
}

Json restore_report(const PowerNetwork& network, const RestorationReport& rep, const RunConfig& cfg) {
  std::vector<MeasurementId> fc;
  for (const auto& r : rep.reduced.fc) fc.push_back(r.measurement);
  Json trace = Json::array();
  for (const auto& t : rep.result.trace)
    trace.push_back(Json{{"id", to_json(t.measurement)},
                         {"residual", to_json(t.residual)},
                         {"outcome", t.outcome == Independence::Independent ? "independent" : "dependent"},
                         {"slack_island", t.slack_island},
                         {"sweeps", t.sweeps}});
  return Json{
      {"islands", islands_json(network, rep.detection.partition)},
      {"k", rep.problem.k},
      {"q", rep.problem.q},
      {"w", rep.problem.w},
      {"fc", ids(fc)},
      {"accepted", ids(rep.result.accepted)},
      {"rejected_dependent", ids(rep.result.rejected_dependent)},
      {"certificate", rep.result.certificate},
      {"exhausted", rep.exhausted},
      {"trace", trace},
      {"config", to_json(cfg)},
  };
}

Json bench_summary(const std::vector<BenchRecord>& records, const BenchSpec& spec, const RunConfig& cfg) {
  Json methods = Json::object();
  for (auto m : spec.methods) {
    Json bins = Json::object();
    for (auto [lo, hi] : {std::pair<std::int64_t, std::int64_t>{2, 17}, {18, 33}}) {
      const auto s = normalized_time_stats(records, m, lo, hi);
      bins[std::to_string(lo) + "-" + std::to_string(hi)] =
          Json{{"count", s.count}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
    }
    std::size_t runs = 0, failed = 0, agree = 0, disagree = 0;
    for (const auto& r : records) {
      if (r.method != m) continue;
      ++runs;
      failed += r.k < 0;
      if (r.agrees_oracle) (*r.agrees_oracle ? agree : disagree) += 1;
    }
    methods[to_string(m)] = Json{{"runs", runs},
                                 {"failed", failed},
                                 {"agree_oracle", agree},
                                 {"disagree_oracle", disagree},
                                 {"t_over_t_gbp", bins}};
  }
  std::size_t restored = 0, certified = 0, w_matched = 0;
  std::vector<double> gbp_ms;
  for (const auto& r : records) {
    if (r.method != Method::Gbp) continue;
    if (r.k >= 0) gbp_ms.push_back(static_cast<double>(r.wall_ns) * 1e-6);
    if (!r.w) continue;
    ++restored;
    certified += r.certificate.value_or(false);
    w_matched += r.accepted && *r.accepted == *r.w;
  }
  std::sort(gbp_ms.begin(), gbp_ms.end());
  Json methods_list = Json::array();
  for (auto m : spec.methods) methods_list.push_back(to_string(m));
  return Json{
      {"configs", spec.configs},
      {"redundancy", {spec.redundancy_lo, spec.redundancy_hi}},
      {"seed", spec.seed},
      {"methods", methods_list},
      {"oracle_cap", spec.oracle_cap},
      {"gbp_median_ms", gbp_ms.empty() ? Json(nullptr) : Json(gbp_ms[gbp_ms.size() / 2])},
      {"restoration", {{"runs", restored}, {"certified", certified}, {"accepted_equals_w", w_matched}}},
      {"by_method", methods},
      {"config", to_json(cfg)},
  };
}

}  // namespace gbpobs
