#include "gbpobs/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "gbpobs/random.hpp"

namespace gbpobs {

using nlohmann::json;

PowerNetwork::PowerNetwork(std::vector<std::int64_t> bus_ids, const std::vector<BranchSpec>& branches,
                           std::optional<std::int64_t> slack_bus, std::string name)
    : name_(std::move(name)), bus_ids_(std::move(bus_ids)) {
  if (bus_ids_.empty()) throw InputError("no buses");
  bus_lookup_.reserve(bus_ids_.size());
  for (std::size_t i = 0; i < bus_ids_.size(); ++i) {
    if (!bus_lookup_.emplace(bus_ids_[i], static_cast<BusIndex>(i)).second)
      throw InputError("buses[" + std::to_string(i) + "]: duplicate bus id " + std::to_string(bus_ids_[i]));
  }
  branches_.reserve(branches.size());
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& b = branches[k];
    const std::string where = "branches[" + std::to_string(k) + "] (id " + std::to_string(b.id) + ")";
    auto from = bus_index(b.from_bus);
    auto to = bus_index(b.to_bus);
    if (!from) throw InputError(where + ": unknown bus " + std::to_string(b.from_bus));
    if (!to) throw InputError(where + ": unknown bus " + std::to_string(b.to_bus));
    if (*from == *to) throw InputError(where + ": from and to are the same bus");
    if (!branch_lookup_.emplace(b.id, k).second) throw InputError(where + ": duplicate branch id");
    branches_.push_back({b.id, *from, *to});
  }
  if (slack_bus) {
    slack_ = bus_index(*slack_bus);
    if (!slack_) throw InputError("slack_bus: unknown bus " + std::to_string(*slack_bus));
  }

  incidence_offsets_.assign(bus_ids_.size() + 1, 0);
  for (const auto& b : branches_) {
    ++incidence_offsets_[b.from + 1];
    ++incidence_offsets_[b.to + 1];
  }
  std::partial_sum(incidence_offsets_.begin(), incidence_offsets_.end(), incidence_offsets_.begin());
  incidence_.resize(incidence_offsets_.back());
  std::vector<std::int32_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    incidence_[fill[branches_[k].from]++] = static_cast<std::int32_t>(k);
    incidence_[fill[branches_[k].to]++] = static_cast<std::int32_t>(k);
  }
}

std::optional<BusIndex> PowerNetwork::bus_index(std::int64_t id) const {
  auto it = bus_lookup_.find(id);
  if (it == bus_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> PowerNetwork::branch_index(std::int64_t id) const {
  auto it = branch_lookup_.find(id);
  if (it == branch_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::int32_t> PowerNetwork::incident_branches(BusIndex bus) const {
  const auto b = static_cast<std::size_t>(bus);
  return {incidence_.data() + incidence_offsets_[b],
          static_cast<std::size_t>(incidence_offsets_[b + 1] - incidence_offsets_[b])};
}

BusIndex PowerNetwork::other_end(std::size_t branch, BusIndex bus) const {
  const auto& b = branches_[branch];
  return b.from == bus ? b.to : b.from;
}

std::string MeasurementId::to_string() const {
  if (is_integer()) return std::to_string(as_integer());
  return std::get<std::string>(value_);
}

const char* to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::Flow: return "flow";
    case MeasurementKind::Injection: return "injection";
    case MeasurementKind::PseudoInjection: return "pseudo_injection";
  }
  return "?";
}

SparseJacobian::SparseJacobian(std::size_t n_cols, std::vector<JacobianRow> rows)
    : n_cols_(n_cols), rows_(std::move(rows)) {
  col_offsets_.assign(n_cols_ + 1, 0);
  for (const auto& r : rows_) {
    nnz_ += r.entries.size();
    for (const auto& e : r.entries) ++col_offsets_[static_cast<std::size_t>(e.column) + 1];
  }
  std::partial_sum(col_offsets_.begin(), col_offsets_.end(), col_offsets_.begin());
  col_rows_.resize(nnz_);
  std::vector<std::int32_t> fill(col_offsets_.begin(), col_offsets_.end() - 1);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& e : rows_[i].entries) col_rows_[fill[e.column]++] = static_cast<std::int32_t>(i);
}

std::span<const std::int32_t> SparseJacobian::column_rows(BusIndex c) const {
  const auto k = static_cast<std::size_t>(c);
  return {col_rows_.data() + col_offsets_[k], static_cast<std::size_t>(col_offsets_[k + 1] - col_offsets_[k])};
}

SparseJacobian SparseJacobian::select(std::span<const std::size_t> row_indices) const {
  std::vector<JacobianRow> out;
  out.reserve(row_indices.size());
  for (auto i : row_indices) out.push_back(rows_.at(i));
  return SparseJacobian(n_cols_, std::move(out));
}

namespace {

json parse_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
}

std::int64_t require_int(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing \"" + key + "\"");
  if (!it->is_number_integer()) throw InputError(where + ": \"" + key + "\" must be an integer");
  return it->get<std::int64_t>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw InputError(where + ": unknown field \"" + it.key() + "\"");
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

}  // namespace

PowerNetwork parse_network(std::istream& in) {
  const json doc = parse_json(in);
  if (!doc.is_object()) throw InputError("case document must be a JSON object");
  reject_unknown(doc, {"buses", "branches", "slack_bus", "name"}, "case");

  auto buses_it = doc.find("buses");
  if (buses_it == doc.end() || !buses_it->is_array()) throw InputError("case: \"buses\" must be an array");
  if (buses_it->empty()) throw InputError("no buses");

  std::vector<std::int64_t> ids;
  ids.reserve(buses_it->size());
  for (std::size_t i = 0; i < buses_it->size(); ++i) {
    const auto& b = (*buses_it)[i];
    const std::string where = "buses[" + std::to_string(i) + "]";
    if (!b.is_object()) throw InputError(where + ": expected object");
    reject_unknown(b, {"id"}, where);
    ids.push_back(require_int(b, "id", where));
  }

  std::vector<PowerNetwork::BranchSpec> branches;
  if (auto it = doc.find("branches"); it != doc.end()) {
    if (!it->is_array()) throw InputError("case: \"branches\" must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& b = (*it)[k];
      const std::string where = "branches[" + std::to_string(k) + "]";
      if (!b.is_object()) throw InputError(where + ": expected object");
      reject_unknown(b, {"id", "from", "to"}, where);
      branches.push_back({require_int(b, "id", where), require_int(b, "from", where), require_int(b, "to", where)});
    }
  }

  std::optional<std::int64_t> slack;
  if (auto it = doc.find("slack_bus"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw InputError("case: \"slack_bus\" must be an integer");
    slack = it->get<std::int64_t>();
  }
  std::string name;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw InputError("case: \"name\" must be a string");
    name = it->get<std::string>();
  }
  return PowerNetwork(std::move(ids), branches, slack, std::move(name));
}

PowerNetwork parse_network_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_network(in);
}

MeasurementSet parse_measurement_set(std::istream& in, const PowerNetwork& network) {
  const json doc = parse_json(in);
  if (!doc.is_array()) throw InputError("measurement document must be a JSON array");

  MeasurementSet set;
  set.network_ref = network.name();
  set.measurements.reserve(doc.size());
  std::set<MeasurementId> seen;

  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& m = doc[k];
    const std::string where = "measurements[" + std::to_string(k) + "]";
    if (!m.is_object()) throw InputError(where + ": expected object");
    reject_unknown(m, {"id", "kind", "branch", "from", "bus", "variance", "value"}, where);

    Measurement out;
    auto id_it = m.find("id");
    if (id_it == m.end()) throw InputError(where + ": missing \"id\"");
    if (id_it->is_number_integer()) {
      out.id = id_it->get<std::int64_t>();
    } else if (id_it->is_string()) {
      out.id = id_it->get<std::string>();
    } else {
      throw InputError(where + ": \"id\" must be an integer or string");
    }
    if (!seen.insert(out.id).second) throw InputError(where + ": duplicate measurement id " + out.id.to_string());

    auto kind_it = m.find("kind");
    if (kind_it == m.end() || !kind_it->is_string()) throw InputError(where + ": missing \"kind\"");
    const auto kind = kind_it->get<std::string>();
    if (kind == "flow") {
      out.kind = MeasurementKind::Flow;
    } else if (kind == "injection") {
      out.kind = MeasurementKind::Injection;
    } else if (kind == "pseudo_injection") {
      out.kind = MeasurementKind::PseudoInjection;
    } else {
      throw InputError(where + ": unknown kind \"" + kind + "\"");
    }

    if (out.kind == MeasurementKind::Flow) {
      if (m.contains("bus")) throw InputError(where + ": flow measurement cannot carry \"bus\"");
      const auto branch_id = require_int(m, "branch", where);
      const auto from_id = require_int(m, "from", where);
      auto br = network.branch_index(branch_id);
      if (!br) throw InputError(where + ": unknown branch " + std::to_string(branch_id));
      auto from = network.bus_index(from_id);
      const auto& b = network.branch(*br);
      if (!from || (*from != b.from && *from != b.to))
        throw InputError(where + ": bus " + std::to_string(from_id) + " is not an end of branch " +
                         std::to_string(branch_id));
      out.branch = *br;
      out.from_side = *from;
    } else {
      if (m.contains("branch") || m.contains("from"))
        throw InputError(where + ": injection measurement cannot carry \"branch\"/\"from\"");
      const auto bus_id = require_int(m, "bus", where);
      auto bus = network.bus_index(bus_id);
      if (!bus) throw InputError(where + ": unknown bus " + std::to_string(bus_id));
      out.bus = *bus;
    }

    if (auto it = m.find("variance"); it != m.end() && !it->is_null()) {
      if (!it->is_number()) throw InputError(where + ": \"variance\" must be a number");
      const double v = it->get<double>();
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError(where + ": variance must be positive");
      out.variance = v;
    }
    if (auto it = m.find("value"); it != m.end() && !it->is_null()) {
      if (!it->is_number()) throw InputError(where + ": \"value\" must be a number");
      out.value = it->get<double>();
    }
    set.measurements.push_back(std::move(out));
  }
  return set;
}

MeasurementSet parse_measurement_file(const std::string& path, const PowerNetwork& network) {
  auto in = open_or_throw(path);
  return parse_measurement_set(in, network);
}

JacobianRow jacobian_row(const PowerNetwork& network, const Measurement& m) {
  JacobianRow row{m.id, {}};
  if (m.kind == MeasurementKind::Flow) {
    const BusIndex to = network.other_end(m.branch, m.from_side);
    row.entries = {{m.from_side, 1}, {to, -1}};
  } else {
    const auto incident = network.incident_branches(m.bus);
    if (incident.empty())
      throw InputError("isolated-bus injection: measurement " + m.id.to_string() + " at bus " +
                       std::to_string(network.bus_id(m.bus)));
    std::map<BusIndex, std::int64_t> acc;
    acc[m.bus] = static_cast<std::int64_t>(incident.size());
    for (auto br : incident) acc[network.other_end(static_cast<std::size_t>(br), m.bus)] -= 1;
    row.entries.reserve(acc.size());
    for (auto [col, coef] : acc) row.entries.push_back({col, coef});
  }
  std::sort(row.entries.begin(), row.entries.end(), [](auto& a, auto& b) { return a.column < b.column; });
  return row;
}

SparseJacobian build_jacobian(const PowerNetwork& network, const MeasurementSet& ms) {
  std::vector<JacobianRow> rows;
  rows.reserve(ms.size());
  for (const auto& m : ms.measurements) rows.push_back(jacobian_row(network, m));
  return SparseJacobian(network.bus_count(), std::move(rows));
}

MeasurementSet generate_measurement_config(const PowerNetwork& network, double redundancy, std::uint64_t seed) {
  if (!(redundancy >= 0.0)) throw InputError("redundancy must be non-negative");

  struct Device {
    MeasurementKind kind;
    std::size_t branch;
    BusIndex side;
  };
  std::vector<Device> pool;
  pool.reserve(2 * network.branch_count() + network.bus_count());
  for (std::size_t k = 0; k < network.branch_count(); ++k) {
    pool.push_back({MeasurementKind::Flow, k, network.branch(k).from});
    pool.push_back({MeasurementKind::Flow, k, network.branch(k).to});
  }
  for (BusIndex i = 0; i < static_cast<BusIndex>(network.bus_count()); ++i)
    if (network.degree(i) > 0) pool.push_back({MeasurementKind::Injection, 0, i});

  const double wanted = std::ceil(redundancy * static_cast<double>(network.bus_count() - 1));
  if (wanted > static_cast<double>(pool.size()))
    throw InputError("redundancy " + std::to_string(redundancy) + " needs " + std::to_string(wanted) +
                     " devices, pool has " + std::to_string(pool.size()));
  const auto count = static_cast<std::size_t>(wanted);

  std::mt19937_64 rng(seed);
  MeasurementSet set;
  set.network_ref = network.name();
  set.measurements.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
    Measurement m;
    m.id = static_cast<std::int64_t>(i);
    m.kind = pool[i].kind;
    if (m.kind == MeasurementKind::Flow) {
      m.branch = pool[i].branch;
      m.from_side = pool[i].side;
    } else {
      m.bus = pool[i].side;
    }
    set.measurements.push_back(std::move(m));
  }
  return set;
}

MeasurementSet boundary_pseudo_candidates(const PowerNetwork& network, std::span<const std::int32_t> island_of) {
  if (island_of.size() != network.bus_count())
    throw std::invalid_argument("island map does not cover the network");
  MeasurementSet set;
  set.network_ref = network.name();
  for (BusIndex i = 0; i < static_cast<BusIndex>(network.bus_count()); ++i) {
    bool boundary = false;
    for (auto br : network.incident_branches(i)) {
      const BusIndex j = network.other_end(static_cast<std::size_t>(br), i);
      if (island_of[static_cast<std::size_t>(i)] != island_of[static_cast<std::size_t>(j)]) {
        boundary = true;
        break;
      }
    }
    if (!boundary) continue;
    Measurement m;
    m.id = "M_P" + std::to_string(network.bus_id(i));
    m.kind = MeasurementKind::PseudoInjection;
    m.bus = i;
    set.measurements.push_back(std::move(m));
  }
  return set;
}

}  // namespace gbpobs
