#include "gbpobs/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

namespace gbpobs {

const char* to_string(VarianceClass c) {
  switch (c) {
    case VarianceClass::Observable: return "OBSERVABLE";
    case VarianceClass::Unobservable: return "UNOBSERVABLE";
    case VarianceClass::Ambiguous: return "AMBIGUOUS";
  }
  return "?";
}

FactorGraph::FactorGraph(std::size_t n_vars, const std::vector<std::vector<std::int32_t>>& factor_vars,
                         std::vector<std::optional<ExtendedVariance>> own)
    : own_(std::move(own)), virtual_(n_vars, ExtendedVariance::infinite()) {
  if (own_.empty()) own_.assign(factor_vars.size(), std::nullopt);
  if (own_.size() != factor_vars.size()) throw std::invalid_argument("own variance count differs from factor count");

  std::vector<std::size_t> degree(n_vars, 0);
  factor_begin_.reserve(factor_vars.size() + 1);
  for (std::size_t f = 0; f < factor_vars.size(); ++f) {
    for (auto x : factor_vars[f]) {
      if (x < 0 || static_cast<std::size_t>(x) >= n_vars) throw std::out_of_range("factor variable out of range");
      edge_var_.push_back(x);
      edge_factor_.push_back(static_cast<std::int32_t>(f));
      ++degree[static_cast<std::size_t>(x)];
    }
    factor_begin_.push_back(edge_var_.size());
  }
  var_begin_.assign(n_vars + 1, 0);
  for (std::size_t x = 0; x < n_vars; ++x) var_begin_[x + 1] = var_begin_[x] + degree[x];
  var_edges_.resize(edge_var_.size());
  std::vector<std::size_t> fill(var_begin_.begin(), var_begin_.end() - 1);
  for (std::size_t e = 0; e < edge_var_.size(); ++e)
    var_edges_[fill[static_cast<std::size_t>(edge_var_[e])]++] = static_cast<std::int32_t>(e);
}

std::int64_t FactorGraph::find_edge(std::size_t f, std::size_t x) const {
  for (std::size_t e = factor_begin_[f]; e < factor_begin_[f + 1]; ++e)
    if (static_cast<std::size_t>(edge_var_[e]) == x) return static_cast<std::int64_t>(e);
  return -1;
}

FactorGraph build_detection_graph(const SparseJacobian& j_kept) {
  std::vector<std::vector<std::int32_t>> fv(j_kept.rows());
  for (std::size_t r = 0; r < j_kept.rows(); ++r)
    for (const auto& entry : j_kept.row(r).entries) fv[r].push_back(static_cast<std::int32_t>(entry.column));
  return FactorGraph(j_kept.cols(), fv);
}

MessageState initial_state(const FactorGraph& g, const SweepConfig& cfg) {
  MessageState s;
  const std::size_t m = g.edge_count();
  s.x2f.assign(m, ExtendedVariance::normalized(cfg.v_init, cfg.limits));
  s.x2f_prev = s.x2f;
  s.f2x.assign(m, ExtendedVariance::infinite());
  s.f2x_prev = s.f2x;
  s.f2x_rise.assign(m, 0);
  s.x2f_rise.assign(m, 0);
  // factor messages start INFINITE, so only the virtual factor counts
  s.marginal.resize(g.variable_count());
  for (std::size_t x = 0; x < g.variable_count(); ++x) s.marginal[x] = g.virtual_variance(x);
  s.marginal_rise.assign(g.variable_count(), 0);
  return s;
}

namespace {

constexpr std::size_t kParallelEdgeThreshold = 1u << 14;

template <class Fn>
void parallel_ranges(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n, 0);
    return;
  }
  const auto t = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
  std::vector<std::jthread> pool;
  pool.reserve(t - 1);
  for (std::size_t i = 1; i < t; ++i) pool.emplace_back([&, i] { fn(n * i / t, n * (i + 1) / t, i); });
  fn(0, n / t, 0);
}

inline double snap(double v, const VarianceLimits& lim) {
  if (v <= lim.zero) return 0.0;
  if (v >= lim.infinite) return std::numeric_limits<double>::infinity();
  return v;
}

/// Updates the rise streak and reports whether the value has settled.
inline bool settle(double o, double v, std::uint16_t& rise, const SweepConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const bool finite = v > 0.0 && v < inf;
  if (finite && v > o) {
    rise = static_cast<std::uint16_t>(rise + (rise < UINT16_MAX));
  } else {
    rise = 0;
  }
  if (!finite) return v == o;
  if (o > 0.0 && o < inf && std::abs(v - o) <= cfg.epsilon * o) return true;
  return v >= cfg.v_high && rise >= cfg.growth_window;
}

}  // namespace

MessageState run_sweeps(const FactorGraph& g, MessageState s, const SweepConfig& cfg) {
  const std::size_t n_f = g.factor_count(), n_x = g.variable_count();
  const int threads = g.edge_count() >= kParallelEdgeThreshold ? std::max(1, cfg.threads) : 1;
  const auto lanes = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::uint64_t> unsettled(lanes), counted(lanes);
  std::size_t max_degree = 0;
  for (std::size_t x = 0; x < n_x; ++x) max_degree = std::max(max_degree, g.variable_edges(x).size());
  for (std::size_t f = 0; f < n_f; ++f) max_degree = std::max(max_degree, g.factor_variables(f).size());
  std::vector<std::vector<double>> scratch(lanes, std::vector<double>(2 * max_degree + 2));
  const VarianceLimits lim = cfg.limits;
  s.converged = false;

  while (s.tau < cfg.tau_max) {
    std::swap(s.f2x, s.f2x_prev);
    std::swap(s.x2f, s.x2f_prev);
    std::fill(unsettled.begin(), unsettled.end(), 0);
    std::fill(counted.begin(), counted.end(), 0);

    // Factor half: f -> x is the series sum of the other x' -> f messages.
    parallel_ranges(n_f, threads, [&](std::size_t lo, std::size_t hi, std::size_t lane) {
      const ExtendedVariance* in = s.x2f_prev.data();
      const ExtendedVariance* old = s.f2x_prev.data();
      ExtendedVariance* out = s.f2x.data();
      std::uint16_t* rise = s.f2x_rise.data();
      double* pre = scratch[lane].data();
      std::uint64_t open = 0;
      for (std::size_t f = lo; f < hi; ++f) {
        const std::size_t b = g.factor_begin(f), e = g.factor_begin(f + 1), d = e - b;
        double run = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          pre[k] = run;
          run += in[b + k].value();
        }
        const auto own = g.own_variance(f);
        run = own ? own->value() : 0.0;
        for (std::size_t k = d; k-- > 0;) {
          const double v = snap(pre[k] + run, lim);
          run += in[b + k].value();
          out[b + k] = ExtendedVariance::from_raw(v);
          open += !settle(old[b + k].value(), v, rise[b + k], cfg);
        }
        counted[lane] += d;
      }
      unsettled[lane] += open;
    });

    // Variable half: x -> f is the parallel combination of the other factor
    // messages and the virtual factor, reading the fresh factor messages.
    parallel_ranges(n_x, threads, [&](std::size_t lo, std::size_t hi, std::size_t lane) {
      const ExtendedVariance* in = s.f2x.data();
      const ExtendedVariance* old = s.x2f_prev.data();
      ExtendedVariance* out = s.x2f.data();
      std::uint16_t* rise = s.x2f_rise.data();
      double* rec = scratch[lane].data();
      double* pre = rec + max_degree + 1;
      std::uint64_t open = 0;
      for (std::size_t x = lo; x < hi; ++x) {
        const auto edges = g.variable_edges(x);
        const std::size_t d = edges.size();
        const double pv = 1.0 / g.virtual_variance(x).value();
        double run = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          rec[k] = 1.0 / in[edges[k]].value();
          pre[k] = run;
          run += rec[k];
        }
        const double total = run + pv;
        run = pv;
        for (std::size_t k = d; k-- > 0;) {
          const auto e = static_cast<std::size_t>(edges[k]);
          const double v = snap(1.0 / (pre[k] + run), lim);
          run += rec[k];
          out[e] = ExtendedVariance::from_raw(v);
          open += !settle(old[e].value(), v, rise[e], cfg);
        }
        const double m = snap(1.0 / total, lim);
        open += !settle(s.marginal[x].value(), m, s.marginal_rise[x], cfg);
        s.marginal[x] = ExtendedVariance::from_raw(m);
        counted[lane] += d + 1;
      }
      unsettled[lane] += open;
    });

    ++s.tau;
    s.messages_last_sweep = 0;
    for (auto c : counted) s.messages_last_sweep += c;
    s.messages_total += s.messages_last_sweep;
    std::uint64_t open = 0;
    for (auto u : unsettled) open += u;
    if (open == 0) {
      s.converged = true;
      break;
    }
  }
  return s;
}

std::vector<ExtendedVariance> marginal_variances(const FactorGraph& g, const MessageState& s,
                                                const VarianceLimits& limits) {
  std::vector<ExtendedVariance> out(g.variable_count());
  for (std::size_t x = 0; x < g.variable_count(); ++x) {
    double precision = 1.0 / g.virtual_variance(x).value();
    for (auto e : g.variable_edges(x)) precision += 1.0 / s.f2x[static_cast<std::size_t>(e)].value();
    out[x] = ExtendedVariance::normalized(1.0 / precision, limits);
  }
  return out;
}

VarianceClass classify_variance(ExtendedVariance v, bool rising, const SweepConfig& cfg) {
  if (v.is_zero()) return VarianceClass::Observable;
  if (v.is_infinite()) return VarianceClass::Unobservable;
  if (v.value() < cfg.v_high) return VarianceClass::Observable;
  return rising ? VarianceClass::Unobservable : VarianceClass::Ambiguous;
}

std::vector<VarianceClass> classify_marginals(const MessageState& s, const SweepConfig& cfg) {
  std::vector<VarianceClass> out(s.marginal.size());
  for (std::size_t x = 0; x < out.size(); ++x)
    out[x] = classify_variance(s.marginal[x], s.marginal_rise[x] >= cfg.growth_window, cfg);
  return out;
}

}  // namespace gbpobs
