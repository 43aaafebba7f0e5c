#pragma once

#include <json.hpp>
#include <optional>
#include <vector>

#include "gbpobs/bench.hpp"
#include "gbpobs/islands.hpp"
#include "gbpobs/network.hpp"
#include "gbpobs/restoration.hpp"

namespace gbpobs {

using Json = nlohmann::ordered_json;

/// Integer ids stay integers, string ids stay strings.
Json to_json(const MeasurementId& id);
Json to_json(const RunConfig& cfg);
Json to_json(const ExtendedVariance& v);

/// {"islands","rejected","dropped","passes","sweeps","probes","message_updates","config"}
Json islands_report(const PowerNetwork& network, const DetectionResult& det, const RunConfig& cfg);
/// Same shape as islands_report; no passes, nothing rejected or dropped.
Json oracle_report(const PowerNetwork& network, const IslandPartition& p, const RunConfig& cfg);
/// {"islands","k","q","w","fc","accepted","rejected_dependent","certificate","exhausted","trace","config"}
Json restore_report(const PowerNetwork& network, const RestorationReport& rep, const RunConfig& cfg);

/// Per-method quartiles of t_method / t_gbp in the 2-17 and 18-33 island
/// bins, plus agreement counts.
Json bench_summary(const std::vector<BenchRecord>& records, const BenchSpec& spec, const RunConfig& cfg);

}  // namespace gbpobs
