#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace gbpobs {

/// Dense 0-based bus index after remapping the ids found in a case file.
using BusIndex = std::int32_t;

/// Raised for malformed or inconsistent input documents.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Branch {
  std::int64_t id = 0;
  BusIndex from = 0;
  BusIndex to = 0;
};

/// Bus/branch model with unit branch susceptances.
///
/// Buses are stored densely; the original ids survive in a lookup table so
/// that reports can speak the caller's numbering. Parallel branches are
/// allowed, the graph does not have to be connected.
class PowerNetwork {
 public:
  struct BranchSpec {
    std::int64_t id;
    std::int64_t from_bus;
    std::int64_t to_bus;
  };

  PowerNetwork(std::vector<std::int64_t> bus_ids, const std::vector<BranchSpec>& branches,
               std::optional<std::int64_t> slack_bus = std::nullopt, std::string name = {});

  std::size_t bus_count() const { return bus_ids_.size(); }
  std::size_t branch_count() const { return branches_.size(); }

  const std::string& name() const { return name_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const Branch& branch(std::size_t index) const { return branches_.at(index); }

  std::int64_t bus_id(BusIndex index) const { return bus_ids_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::int64_t>& bus_ids() const { return bus_ids_; }
  std::optional<BusIndex> bus_index(std::int64_t id) const;
  std::optional<std::size_t> branch_index(std::int64_t id) const;
  std::optional<BusIndex> slack_bus() const { return slack_; }

  /// Branch indices incident to a bus.
  std::span<const std::int32_t> incident_branches(BusIndex bus) const;
  /// Opposite endpoint of a branch seen from `bus`.
  BusIndex other_end(std::size_t branch, BusIndex bus) const;
  std::size_t degree(BusIndex bus) const { return incident_branches(bus).size(); }

 private:
  std::string name_;
  std::vector<std::int64_t> bus_ids_;
  std::unordered_map<std::int64_t, BusIndex> bus_lookup_;
  std::vector<Branch> branches_;
  std::unordered_map<std::int64_t, std::size_t> branch_lookup_;
  std::optional<BusIndex> slack_;
  std::vector<std::int32_t> incidence_offsets_;
  std::vector<std::int32_t> incidence_;
};

/// Measurement identifiers keep the JSON type they were read with so that
/// reports echo `3` for `3` and `"M_P1"` for `"M_P1"`.
class MeasurementId {
 public:
  MeasurementId() = default;
  MeasurementId(std::int64_t v) : value_(v) {}
  MeasurementId(std::string v) : value_(std::move(v)) {}
  MeasurementId(const char* v) : value_(std::string(v)) {}

  bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
  std::string to_string() const;

  friend bool operator==(const MeasurementId&, const MeasurementId&) = default;
  friend auto operator<=>(const MeasurementId&, const MeasurementId&) = default;

 private:
  std::variant<std::int64_t, std::string> value_ = std::int64_t{0};
};

enum class MeasurementKind { Flow, Injection, PseudoInjection };

const char* to_string(MeasurementKind kind);

struct Measurement {
  MeasurementId id;
  MeasurementKind kind = MeasurementKind::Flow;
  /// Flow: branch index and the bus on the metered side.
  std::size_t branch = 0;
  BusIndex from_side = 0;
  /// Injection and pseudo-injection: bus index.
  BusIndex bus = 0;
  std::optional<double> variance;
  /// Carried through but never read by the analysis.
  std::optional<double> value;

  bool is_injection() const { return kind != MeasurementKind::Flow; }
};

struct MeasurementSet {
  std::vector<Measurement> measurements;
  std::string network_ref;

  std::size_t size() const { return measurements.size(); }
  bool empty() const { return measurements.empty(); }
};

/// One Jacobian row entry: column (bus index) and integer coefficient.
struct RowEntry {
  BusIndex column;
  std::int64_t coefficient;

  friend bool operator==(const RowEntry&, const RowEntry&) = default;
};

struct JacobianRow {
  MeasurementId measurement;
  std::vector<RowEntry> entries;  // sorted by column, no zeros
};

/// Integer DC measurement Jacobian with a per-column row index.
class SparseJacobian {
 public:
  SparseJacobian() = default;
  SparseJacobian(std::size_t n_cols, std::vector<JacobianRow> rows);

  std::size_t cols() const { return n_cols_; }
  std::size_t rows() const { return rows_.size(); }
  std::size_t nonzeros() const { return nnz_; }
  const JacobianRow& row(std::size_t i) const { return rows_[i]; }
  const std::vector<JacobianRow>& row_list() const { return rows_; }
  /// Rows with a nonzero in column `c`.
  std::span<const std::int32_t> column_rows(BusIndex c) const;

  /// Sub-matrix made of the given rows, in the given order.
  SparseJacobian select(std::span<const std::size_t> row_indices) const;

 private:
  std::size_t n_cols_ = 0;
  std::vector<JacobianRow> rows_;
  std::size_t nnz_ = 0;
  std::vector<std::int32_t> col_offsets_;
  std::vector<std::int32_t> col_rows_;
};

PowerNetwork parse_network(std::istream& in);
PowerNetwork parse_network_file(const std::string& path);

MeasurementSet parse_measurement_set(std::istream& in, const PowerNetwork& network);
MeasurementSet parse_measurement_file(const std::string& path, const PowerNetwork& network);

/// Row for a single measurement; throws InputError for an injection at a
/// bus without branches (the row would be identically zero).
JacobianRow jacobian_row(const PowerNetwork& network, const Measurement& m);

SparseJacobian build_jacobian(const PowerNetwork& network, const MeasurementSet& ms);

/// Draws ceil(redundancy * (n - 1)) devices uniformly without replacement
/// from {flow at both ends of every branch} U {injection at every bus with
/// at least one branch}. Deterministic for a fixed seed.
MeasurementSet generate_measurement_config(const PowerNetwork& network, double redundancy,
                                           std::uint64_t seed);

/// One PSEUDO_INJECTION per bus touching a branch whose ends lie in
/// different islands, in ascending bus index order. Ids are "M_P<bus id>".
/// `island_of` maps each bus index to its island number.
MeasurementSet boundary_pseudo_candidates(const PowerNetwork& network,
                                          std::span<const std::int32_t> island_of);

}  // namespace gbpobs
