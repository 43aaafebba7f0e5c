#include <doctest.h>

#include "common.hpp"
#include "gbpobs/bench.hpp"
#include "gbpobs/exact_linalg.hpp"

using namespace gbpobs;

namespace {

SparseJacobian from_dense(std::initializer_list<std::initializer_list<long>> rows, std::size_t n) {
  std::vector<JacobianRow> out;
  std::int64_t id = 0;
  for (const auto& r : rows) {
    JacobianRow row{id++, {}};
    BusIndex c = 0;
    for (long v : r) {
      if (v != 0) row.entries.push_back({c, v});
      ++c;
    }
    out.push_back(row);
  }
  return SparseJacobian(n, out);
}

bool annihilates(const SparseJacobian& j, const RationalMatrix& basis) {
  return (RationalMatrix(j) * basis).is_zero();
}

}  // namespace

TEST_CASE("rank of small matrices") {
  const auto net = test::case6();
  const auto j = build_jacobian(net, test::case6_meas(net));
  CHECK(row_rank(j) == 4);
  CHECK(row_rank(RationalMatrix(j)) == 4);
  CHECK(row_rank(RationalMatrix(3, 4)) == 0);
  RationalMatrix eye(5, 5);
  for (std::size_t i = 0; i < 5; ++i) eye(i, i) = 1;
  CHECK(row_rank(eye) == 5);
}

TEST_CASE("greedy independent rows") {
  const auto net = test::case6();
  const auto j = build_jacobian(net, test::case6_meas(net));
  const auto all = independent_row_subset(j);
  CHECK(all.kept == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(all.rejected.empty());

  const auto dup = independent_row_subset(from_dense({{1, -1}, {1, -1}}, 2));
  CHECK(dup.kept == std::vector<std::size_t>{0});
  CHECK(dup.rejected == std::vector<std::size_t>{1});

  const auto path = independent_row_subset(from_dense({{1, -1, 0}, {0, 1, -1}, {-1, 2, -1}}, 3));
  CHECK(path.rejected == std::vector<std::size_t>{2});
}

TEST_CASE("null space") {
  const auto net = test::case6();
  const auto j = build_jacobian(net, test::case6_meas(net));
  const auto b = null_space_basis(j);
  CHECK(b.cols() == 2);
  CHECK(annihilates(j, b));
  // every solution has x1 = x2, x4 = x5 = x6, 3 x3 = 2 x1 + x4
  for (std::size_t c = 0; c < b.cols(); ++c) {
    CHECK(b(0, c) == b(1, c));
    CHECK(b(3, c) == b(4, c));
    CHECK(b(4, c) == b(5, c));
    CHECK(3 * b(2, c) == 2 * b(0, c) + b(3, c));
  }
  const auto none = null_space_basis(SparseJacobian(3, {}));
  CHECK(none.cols() == 3);
  const auto tree = from_dense({{1, -1, 0, 0}, {0, 1, -1, 0}, {0, 0, 1, -1}}, 4);
  const auto ones = null_space_basis(tree);
  REQUIRE(ones.cols() == 1);
  for (std::size_t r = 1; r < 4; ++r) CHECK(ones(r, 0) == ones(0, 0));
}

TEST_CASE("incremental echelon agrees with dense rank on random systems") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto net = make_synthetic_network(40, 2.5, seed);
    const auto j = build_jacobian(net, generate_measurement_config(net, 0.4 + 0.1 * static_cast<double>(seed % 10), seed));
    const auto split = independent_row_subset(j);
    const auto r = row_rank(RationalMatrix(j));
    CHECK(split.kept.size() == r);
    CHECK(row_rank(j.select(split.kept)) == r);
    IncrementalEchelon ech(j.cols());
    for (auto k : split.kept) ech.insert(j.row(k).entries);
    for (auto k : split.rejected) CHECK(ech.in_span(j.row(k).entries));
    const auto b = null_space_basis(j);
    CHECK(b.cols() == j.cols() - r);
    CHECK(annihilates(j, b));
  }
}

TEST_CASE("echelon promotes to bignum without losing exactness") {
  // powers of a large base overflow 64-bit elimination quickly
  const std::size_t n = 12;
  IncrementalEchelon ech(n);
  std::vector<std::vector<RowEntry>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<RowEntry> r;
    std::int64_t v = 1;
    for (std::size_t c = 0; c < n; ++c) {
      r.push_back({static_cast<BusIndex>(c), v});
      v = (v * static_cast<std::int64_t>(i + 2)) % 1000003 + 1;
    }
    rows.push_back(r);
    ech.insert(r);
  }
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : rows[i]) m(i, static_cast<std::size_t>(e.column)) = e.coefficient;
  CHECK(ech.rank() == row_rank(m));
  CHECK(ech.uses_bignum());
}
