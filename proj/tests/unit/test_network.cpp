#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common.hpp"
#include "gbpobs/bench.hpp"

using namespace gbpobs;

namespace {

std::vector<std::int64_t> dense(const JacobianRow& r, std::size_t n) {
  std::vector<std::int64_t> out(n, 0);
  for (const auto& e : r.entries) out[static_cast<std::size_t>(e.column)] = e.coefficient;
  return out;
}

}  // namespace

TEST_CASE("six-bus case parses") {
  const auto net = test::case6();
  CHECK(net.bus_count() == 6);
  CHECK(net.branch_count() == 6);
  CHECK(net.slack_bus() == net.bus_index(1));
  CHECK(net.degree(*net.bus_index(3)) == 3);
  CHECK(net.name() == "case6");
}

TEST_CASE("case errors name their location") {
  CHECK_THROWS_WITH_AS(test::net(R"({"buses": []})"), doctest::Contains("no buses"), InputError);
  CHECK_THROWS_WITH_AS(test::net(R"({"buses": [{"id": 1}, {"id": 2}], "branches": [{"id": 4, "from": 1, "to": 99}]})"),
                       doctest::Contains("99"), InputError);
  CHECK_THROWS_AS(test::net(R"({"buses": [{"id": 1}, {"id": 1}]})"), InputError);
  CHECK_THROWS_AS(test::net(R"({"buses": [{"id": 1}], "extra": 0})"), InputError);
  CHECK_THROWS_AS(test::net(R"({"buses": [{"id": 1}, {"id": 2}], "branches": [{"id": 1, "from": 2, "to": 2}]})"),
                  InputError);
  CHECK_THROWS_WITH_AS(test::net("{\"buses\": ["), doctest::Contains("byte"), InputError);
}

TEST_CASE("measurement parsing") {
  const auto net = test::case6();
  const auto ms = test::case6_meas(net);
  REQUIRE(ms.size() == 4);
  CHECK(ms.measurements[0].id == MeasurementId("M_P12"));
  CHECK(ms.measurements[2].kind == MeasurementKind::Injection);

  CHECK(test::meas("[]", net).empty());
  const auto ints = test::meas(R"([{"id": 7, "kind": "flow", "branch": 1, "from": 2, "variance": 0.5, "value": 1.25}])", net);
  CHECK(ints.measurements[0].id.is_integer());
  CHECK(ints.measurements[0].from_side == *net.bus_index(2));
  CHECK(ints.measurements[0].value == 1.25);

  CHECK_THROWS_AS(test::meas(R"([{"id": 1, "kind": "injection", "bus": 42}])", net), InputError);
  CHECK_THROWS_AS(test::meas(R"([{"id": 1, "kind": "voltage", "bus": 1}])", net), InputError);
  CHECK_THROWS_AS(test::meas(R"([{"id": 1, "kind": "injection", "bus": 1, "variance": 0}])", net), InputError);
  CHECK_THROWS_AS(test::meas(R"([{"id": 1, "kind": "flow", "branch": 1, "from": 5}])", net), InputError);
  CHECK_THROWS_AS(test::meas(R"([{"id": 1, "kind": "injection", "bus": 1}, {"id": 1, "kind": "injection", "bus": 2}])", net),
                  InputError);
}

TEST_CASE("six-bus Jacobian rows") {
  const auto net = test::case6();
  const auto j = build_jacobian(net, test::case6_meas(net));
  REQUIRE(j.rows() == 4);
  CHECK(dense(j.row(0), 6) == std::vector<std::int64_t>{1, -1, 0, 0, 0, 0});
  CHECK(dense(j.row(1), 6) == std::vector<std::int64_t>{0, 0, 0, 1, -1, 0});
  CHECK(dense(j.row(2), 6) == std::vector<std::int64_t>{-1, -1, 3, -1, 0, 0});
  CHECK(dense(j.row(3), 6) == std::vector<std::int64_t>{0, 0, 0, -1, 2, -1});
  CHECK(j.nonzeros() == 2 + 2 + 4 + 3);
  for (const auto& r : j.row_list()) {
    std::int64_t sum = 0;
    for (const auto& e : r.entries) sum += e.coefficient;
    CHECK(sum == 0);
  }
  CHECK(j.column_rows(*net.bus_index(4)).size() == 3);
}

TEST_CASE("two-bus flow and isolated injection") {
  const auto net = test::net(R"({"buses": [{"id": 1}, {"id": 2}, {"id": 3}], "branches": [{"id": 1, "from": 1, "to": 2}]})");
  const auto j = build_jacobian(net, test::meas(R"([{"id": 1, "kind": "flow", "branch": 1, "from": 1}])", net));
  CHECK(dense(j.row(0), 3) == std::vector<std::int64_t>{1, -1, 0});
  CHECK_THROWS_WITH_AS(build_jacobian(net, test::meas(R"([{"id": 1, "kind": "injection", "bus": 3}])", net)),
                       doctest::Contains("isolated-bus injection"), InputError);
}

TEST_CASE("Jacobian is permutation-equivariant") {
  const auto net = test::case6();
  auto ms = test::case6_meas(net);
  const auto j = build_jacobian(net, ms);
  std::reverse(ms.measurements.begin(), ms.measurements.end());
  const auto jr = build_jacobian(net, ms);
  for (std::size_t i = 0; i < 4; ++i) CHECK(jr.row(3 - i).entries == j.row(i).entries);
}

TEST_CASE("random configurations") {
  const auto net = test::case6();
  const auto a = generate_measurement_config(net, 1.0, 7);
  const auto b = generate_measurement_config(net, 1.0, 7);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.measurements[i].id == b.measurements[i].id);
    CHECK(a.measurements[i].kind == b.measurements[i].kind);
  }
  CHECK(generate_measurement_config(net, 0.0, 1).empty());
  CHECK_THROWS_AS(generate_measurement_config(net, 10.0, 1), InputError);

  const auto big = make_synthetic_network(1354, 2.7, 3);
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ms = generate_measurement_config(big, 1.5, seed);
    CHECK(ms.size() == static_cast<std::size_t>(std::ceil(1.5 * 1353)));
    std::vector<std::string> ids;
    for (const auto& m : ms.measurements)
      ids.push_back(std::to_string(static_cast<int>(m.kind)) + ":" + std::to_string(m.branch) + ":" +
                    std::to_string(m.from_side) + ":" + std::to_string(m.bus));
    std::sort(ids.begin(), ids.end());
    seen.insert(ids);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("boundary candidates") {
  const auto net = test::case6();
  const std::vector<std::int32_t> label{0, 0, 1, 2, 2, 2};
  const auto c = boundary_pseudo_candidates(net, label);
  std::vector<std::string> ids;
  for (const auto& m : c.measurements) {
    CHECK(m.kind == MeasurementKind::PseudoInjection);
    ids.push_back(m.id.to_string());
  }
  CHECK(ids == std::vector<std::string>{"M_P1", "M_P2", "M_P3", "M_P4"});
  CHECK(boundary_pseudo_candidates(net, std::vector<std::int32_t>(6, 0)).empty());

  const auto path = test::net(R"({"buses": [{"id": 1}, {"id": 2}, {"id": 3}],
    "branches": [{"id": 1, "from": 1, "to": 2}, {"id": 2, "from": 2, "to": 3}]})");
  CHECK(boundary_pseudo_candidates(path, std::vector<std::int32_t>{0, 1, 2}).size() == 3);
}
