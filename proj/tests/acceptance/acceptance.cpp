// Acceptance suite. One PASS/FAIL line per criterion; the argument picks a
// group: golden (1, 2, 8), scale (3, 4), complexity (5), throughput (6),
// probe (7), or all.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gbpobs/bench.hpp"
#include "gbpobs/exact_linalg.hpp"
#include "gbpobs/oracle.hpp"
#include "gbpobs/random.hpp"
#include "gbpobs/restoration.hpp"

using namespace gbpobs;
using EV = ExtendedVariance;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kData = GBPOBS_DATA_DIR;
bool all_ok = true;

void report(int n, const std::string& what, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  all_ok = all_ok && ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- golden

void criterion1() {
  const auto net = parse_network_file(kData + "/case6.json");
  const auto ms = parse_measurement_file(kData + "/case6_meas.json", net);
  const auto j = build_jacobian(net, ms);
  bool ok = true;
  std::string why;
  auto expect = [&](bool c, const char* what) {
    if (!c) {
      ok = false;
      why += std::string(why.empty() ? "" : "; ") + what;
    }
  };

  auto g = build_detection_graph(j);
  g.set_virtual_variance(0, EV::zero());
  SweepConfig one;
  one.tau_max = 1;
  const auto s1 = run_sweeps(g, initial_state(g, one), one);
  // factors: 0 = M_P12 (f7), 2 = M_P3 (f9)
  expect(s1.f2x[static_cast<std::size_t>(g.find_edge(2, 0))] == EV::finite(3), "f9->x1 after one sweep != 3");
  expect(s1.x2f[static_cast<std::size_t>(g.find_edge(0, 0))].is_zero(), "x1->f7 after one sweep != ZERO");
  const SweepConfig cfg;
  const auto s = run_sweeps(g, initial_state(g, cfg), cfg);
  expect(s.f2x[static_cast<std::size_t>(g.find_edge(0, 1))].is_zero(), "final f7->x2 != ZERO");
  const auto m = marginal_variances(g, s);
  expect(m[0].is_zero() && m[1].is_zero(), "x1/x2 marginals not ZERO");
  for (std::size_t x = 2; x < 6; ++x) expect(m[x].is_infinite(), "x3..x6 marginal not INFINITE");

  const auto det = detect_islands(j);
  const std::vector<std::vector<std::int64_t>> want{{1, 2}, {3}, {4, 5, 6}};
  expect(canonical_islands(net, det.partition) == want, "islands differ");

  std::vector<double> t;
  for (int r = 0; r < 21; ++r) {
    const auto t0 = Clock::now();
    (void)detect_islands(net, ms);
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  expect(t[t.size() / 2] < 0.010, "runtime");
  report(1, "golden 6-bus island identification", ok,
         (ok ? std::string("islands {1,2},{3},{4,5,6}; messages and marginals exact") : why) +
             fmt("; median %.3f ms", t[t.size() / 2] * 1e3));
}

void criterion2() {
  const auto net = parse_network_file(kData + "/case6.json");
  const auto ms = parse_measurement_file(kData + "/case6_meas.json", net);
  const auto rep = run_restoration(net, ms, std::nullopt, {}, {});
  const bool fc = rep.reduced.fc.size() == 1 && rep.reduced.fc[0].measurement == MeasurementId("M_P3");
  const bool counts = rep.problem.q == 1 && rep.problem.w == 1;
  const bool acc = rep.result.accepted == std::vector<MeasurementId>{"M_P1"};
  const bool residual = !rep.result.trace.empty() && rep.result.trace[0].measurement == MeasurementId("M_P1") &&
                        rep.result.trace[0].residual.is_infinite();
  const bool ok = fc && counts && acc && residual && rep.result.certificate;
  report(2, "golden 6-bus restoration", ok,
         fmt("F_c=%s q=%zu w=%lld accepted=%s residual=%s certificate=%s", fc ? "{M_P3}" : "?", rep.problem.q,
             static_cast<long long>(rep.problem.w), acc ? "[M_P1]" : "?",
             rep.result.trace.empty() ? "-" : to_string(rep.result.trace[0].residual.tag()),
             rep.result.certificate ? "true" : "false"));
}

// reference model: tags only, plus the finite sum
EV ref_serial(const std::vector<EV>& in, std::optional<EV> own) {
  std::vector<EV> all = in;
  if (own) all.push_back(*own);
  double sum = 0;
  for (auto v : all) {
    if (v.is_infinite()) return EV::infinite();
    if (v.is_finite()) sum += v.value();
  }
  return sum == 0 ? EV::zero() : EV::finite(sum);
}

EV ref_parallel(const std::vector<EV>& in) {
  double inv = 0;
  for (auto v : in) {
    if (v.is_zero()) return EV::zero();
    if (v.is_finite()) inv += 1.0 / v.value();
  }
  return inv == 0 ? EV::infinite() : EV::finite(1.0 / inv);
}

std::vector<RestorationReport> scaled_restorations(double v_i, std::size_t configs, std::size_t& ambiguous) {
  std::vector<RestorationReport> out;
  for (std::size_t c = 0; c < configs; ++c) {
    std::mt19937_64 rng(7000 + c);
    const std::size_t n = 30 + uniform_below(rng, 171);
    const auto net = make_synthetic_network(n, 2.0 + 1.4 * uniform_unit(rng), rng());
    const auto ms = generate_measurement_config(net, 1.0 + 1.2 * uniform_unit(rng), rng());
    RestorationConfig rc;
    rc.v_i = v_i;
    try {
      out.push_back(run_restoration(net, ms, std::nullopt, {}, rc));
    } catch (const AmbiguousConvergence&) {
      ++ambiguous;
      out.emplace_back();
    }
  }
  return out;
}

void criterion8() {
  const std::vector<EV> vals{EV::zero(), EV::finite(0.5), EV::finite(3.0), EV::infinite()};
  std::vector<std::optional<EV>> owns{std::nullopt};
  for (auto v : vals) owns.push_back(v);
  std::size_t cases = 0, bad = 0;
  std::function<void(std::vector<EV>&, std::size_t)> rec = [&](std::vector<EV>& in, std::size_t arity) {
    if (in.size() == arity) {
      for (const auto& own : owns) {
        ++cases;
        const auto got = serial_variance(in, own);
        const auto want = ref_serial(in, own);
        if (got.tag() != want.tag() || (got.is_finite() && std::abs(got.value() - want.value()) > 1e-12 * want.value())) ++bad;
      }
      if (!in.empty()) {
        ++cases;
        const auto got = parallel_variance(in);
        const auto want = ref_parallel(in);
        if (got.tag() != want.tag() || (got.is_finite() && std::abs(got.value() - want.value()) > 1e-12 * want.value())) ++bad;
      }
      return;
    }
    for (auto v : vals) {
      in.push_back(v);
      rec(in, arity);
      in.pop_back();
    }
  };
  for (std::size_t arity = 0; arity <= 3; ++arity) {
    std::vector<EV> in;
    rec(in, arity);
  }

  const std::size_t configs = 300;
  std::size_t amb1 = 0, amb10 = 0, tests = 0, changed = 0;
  const auto a = scaled_restorations(1.0, configs, amb1);
  const auto b = scaled_restorations(10.0, configs, amb10);
  for (std::size_t c = 0; c < configs; ++c) {
    const auto& ta = a[c].result.trace;
    const auto& tb = b[c].result.trace;
    const std::size_t common = std::min(ta.size(), tb.size());
    tests += common;
    for (std::size_t i = 0; i < common; ++i)
      if (ta[i].measurement != tb[i].measurement || ta[i].outcome != tb[i].outcome) ++changed;
    if (ta.size() != tb.size()) ++changed;
  }
  const bool ok = bad == 0 && changed == 0 && amb1 == amb10;
  report(8, "extended-arithmetic algebra and v_i scaling", ok,
         fmt("%zu combinations, %zu wrong; %zu residual tests over %zu configs, %zu outcomes changed by v_i x10",
             cases, bad, tests, configs, changed));
}

// ---------------------------------------------------------------- scale

struct SuiteConfig {
  PowerNetwork net;
  MeasurementSet ms;
};

SuiteConfig suite_config(std::uint64_t c) {
  std::mt19937_64 rng(1000 + c);
  const std::size_t n = 30 + uniform_below(rng, 471);
  const double deg = 2.0 + 1.4 * uniform_unit(rng);
  auto net = make_synthetic_network(n, deg, rng());
  double red = 1.0 + 1.8 * uniform_unit(rng);
  red = std::min(red, (2.0 * static_cast<double>(net.branch_count()) + static_cast<double>(n)) / static_cast<double>(n - 1));
  auto ms = generate_measurement_config(net, red, rng());
  return {std::move(net), std::move(ms)};
}

void criteria3and4() {
  const std::size_t wanted = 5000;
  std::size_t used = 0, mismatch = 0, ambiguous = 0, restorations = 0, exhausted = 0, wrong_count = 0,
              cert_fail = 0, rest_ambiguous = 0;
  double t_detect = 0, t_oracle = 0, t_restore = 0;
  std::uint64_t first_mismatch = UINT64_MAX;
  const auto t0 = Clock::now();
  for (std::uint64_t c = 0; used < wanted; ++c) {
    const auto cfg = suite_config(c);
    const auto j = build_jacobian(cfg.net, cfg.ms);
    auto t = Clock::now();
    const auto truth = oracle_islands(cfg.net, j);
    t_oracle += seconds_since(t);
    if (truth.size() < 1 || truth.size() > 40) continue;
    ++used;
    std::optional<DetectionResult> det;
    t = Clock::now();
    try {
      det = detect_islands(j);
    } catch (const AmbiguousConvergence&) {
      ++ambiguous;
    }
    t_detect += seconds_since(t);
    if (!det) continue;
    if (!partitions_equal(det->partition, truth)) {
      ++mismatch;
      first_mismatch = std::min(first_mismatch, c);
      continue;
    }
    if (truth.size() < 2) continue;
    ++restorations;
    t = Clock::now();
    try {
      const auto rep = restore_after_detection(cfg.net, j, std::move(*det), std::nullopt, {});
      if (rep.exhausted) {
        ++exhausted;
      } else {
        if (static_cast<std::int64_t>(rep.result.accepted.size()) != rep.problem.w) ++wrong_count;
        if (!rep.result.certificate) ++cert_fail;
      }
    } catch (const AmbiguousConvergence&) {
      ++rest_ambiguous;
    }
    t_restore += seconds_since(t);
  }
  const double total = seconds_since(t0);
  report(3, "oracle equivalence at scale", mismatch == 0 && ambiguous == 0 && t_detect + t_oracle < 300,
         fmt("%zu configs with 1-40 islands, %zu mismatches, %zu ambiguous%s; detection %.1f s, oracle %.1f s", used,
             mismatch, ambiguous,
             first_mismatch == UINT64_MAX ? "" : fmt(", first at config %llu", static_cast<unsigned long long>(first_mismatch)).c_str(),
             t_detect, t_oracle));
  const bool ok4 = exhausted == 0 && wrong_count == 0 && cert_fail == 0 && rest_ambiguous == 0;
  report(4, "restoration soundness sweep", ok4,
         fmt("%zu restorations with k>=2: %zu exhausted, %zu ambiguous, %zu with |accepted| != w, %zu certificate "
             "failures; %.1f s (suite total %.1f s)",
             restorations, exhausted, rest_ambiguous, wrong_count, cert_fail, t_restore, total));
}

// ---------------------------------------------------------------- complexity

void criterion5() {
  const std::vector<std::size_t> targets{1000, 10000, 100000};
  std::vector<double> xs, ys;
  bool counts_ok = true;
  std::string detail;
  for (auto target : targets) {
    // about 3.5 nonzeros per bus at redundancy 1.5
    const std::size_t n = std::max<std::size_t>(30, target * 2 / 7);
    const auto net = make_synthetic_network(n, 2.7, 17);
    const auto j = build_jacobian(net, generate_measurement_config(net, 1.5, 17));
    const auto split = independent_row_subset(j);
    const auto kept = j.select(split.kept);
    auto g = build_detection_graph(kept);
    g.set_virtual_variance(0, EV::zero());
    SweepConfig cfg;
    cfg.tau_max = 20;
    const auto s = run_sweeps(g, initial_state(g, cfg), cfg);
    counts_ok = counts_ok && s.messages_last_sweep == 2 * kept.nonzeros() + kept.cols();
    double best = 1e30;
    for (int rep = 0; rep < 5; ++rep) {
      int sweeps = 0;
      const auto t0 = Clock::now();
      while (seconds_since(t0) < 0.05) sweeps += run_sweeps(g, initial_state(g, cfg), cfg).tau;
      best = std::min(best, seconds_since(t0) / sweeps);
    }
    xs.push_back(std::log(static_cast<double>(kept.nonzeros())));
    ys.push_back(std::log(best));
    detail += fmt("%zu edges %.1f us/sweep; ", kept.nonzeros(), best * 1e6);
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  report(5, "linear per-iteration complexity", counts_ok && slope >= 0.9 && slope <= 1.3,
         detail + fmt("updates per sweep %s 2*nnz+n; exponent %.3f", counts_ok ? "==" : "!=", slope));
}

// ---------------------------------------------------------------- throughput

void criterion6() {
  const auto net = make_synthetic_network(10000, 2.7, 42);
  std::vector<double> t;
  std::vector<std::size_t> ks;
  for (int c = 0; c < 15 && t.size() < 9; ++c) {
    const double red = 2.9 + 0.2 * (c % 8) / 7.0;
    const auto j = build_jacobian(net, generate_measurement_config(net, red, 500 + static_cast<std::uint64_t>(c)));
    const auto t0 = Clock::now();
    const auto det = detect_islands(j);
    const double s = seconds_since(t0);
    if (det.partition.size() < 2 || det.partition.size() > 17) continue;
    t.push_back(s);
    ks.push_back(det.partition.size());
  }
  std::sort(t.begin(), t.end());
  const double med = t.empty() ? 1e9 : t[t.size() / 2];
  const auto [kmin, kmax] = std::minmax_element(ks.begin(), ks.end());
  report(6, "10000-bus island detection throughput", !t.empty() && med < 1.0,
         fmt("%zu configs with k in [%zu, %zu], median %.3f s, max %.3f s", t.size(), ks.empty() ? 0 : *kmin,
             ks.empty() ? 0 : *kmax, med, t.empty() ? 0.0 : t.back()));
}

// ---------------------------------------------------------------- probe

void criterion7() {
  std::size_t runs = 0, differ = 0, ambiguous = 0, multi = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t c = 0; c < 50; ++c) {
    std::mt19937_64 rng(9000 + c);
    const std::size_t n = 30 + uniform_below(rng, 171);
    const auto net = make_synthetic_network(n, 2.0 + 1.4 * uniform_unit(rng), rng());
    const auto j = build_jacobian(net, generate_measurement_config(net, 1.2 + 1.2 * uniform_unit(rng), rng()));
    std::optional<IslandPartition> ref;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      ++runs;
      DetectionConfig dc;
      dc.probe = {ProbePolicy::SeededRandom, seed};
      try {
        auto p = detect_islands(j, dc).partition;
        if (!ref) {
          ref = std::move(p);
          multi += ref->size() > 1;
        } else if (!partitions_equal(p, *ref)) {
          ++differ;
        }
      } catch (const AmbiguousConvergence&) {
        ++ambiguous;
      }
    }
  }
  report(7, "probe invariance", differ == 0 && ambiguous == 0,
         fmt("%zu runs over 50 configs (%zu with several islands), %zu differing partitions, %zu ambiguous; %.1f s",
             runs, multi, differ, ambiguous, seconds_since(t0)));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "all";
  const bool all = group == "all";
  if (all || group == "golden") {
    criterion1();
    criterion2();
    criterion8();
  }
  if (all || group == "scale") criteria3and4();
  if (all || group == "complexity") criterion5();
  if (all || group == "throughput") criterion6();
  if (all || group == "probe") criterion7();
  return all_ok ? 0 : 1;
}
