#include "gbpobs/exact_linalg.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace gbpobs {

namespace {

struct Overflow {};

// Checked 64-bit integer arithmetic. Any overflow aborts the whole echelon
// and the caller replays it with GMP integers.
struct CheckedInt {
  using value_type = std::int64_t;
  static value_type from(std::int64_t v) { return v; }
  static bool is_zero(value_type v) { return v == 0; }
  static bool is_unit(value_type v) { return v == 1 || v == -1; }
  static value_type mul(value_type a, value_type b) {
    value_type out;
    if (__builtin_mul_overflow(a, b, &out)) throw Overflow{};
    return out;
  }
  static value_type sub(value_type a, value_type b) {
    value_type out;
    if (__builtin_sub_overflow(a, b, &out)) throw Overflow{};
    return out;
  }
  static value_type gcd(value_type a, value_type b) {
    if (a == std::numeric_limits<value_type>::min() || b == std::numeric_limits<value_type>::min()) throw Overflow{};
    return std::gcd(a, b);
  }
  static value_type div(value_type a, value_type b) { return a / b; }
  static bool negative(value_type v) { return v < 0; }
  static value_type neg(value_type v) {
    if (v == std::numeric_limits<value_type>::min()) throw Overflow{};
    return -v;
  }
};

struct BigInt {
  using value_type = mpz_class;
  static value_type from(std::int64_t v) { return mpz_class(static_cast<long>(v)); }
  static bool is_zero(const value_type& v) { return sgn(v) == 0; }
  static bool is_unit(const value_type& v) { return v == 1 || v == -1; }
  static value_type mul(const value_type& a, const value_type& b) { return a * b; }
  static value_type sub(const value_type& a, const value_type& b) { return a - b; }
  static value_type gcd(const value_type& a, const value_type& b) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
  }
  static value_type div(const value_type& a, const value_type& b) {
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
  }
  static bool negative(const value_type& v) { return sgn(v) < 0; }
  static value_type neg(const value_type& v) { return -v; }
};

template <class Ops>
class EchelonCore {
 public:
  using T = typename Ops::value_type;

  EchelonCore(std::size_t n_cols, const std::vector<std::uint32_t>* weight)
      : weight_(weight), owner_(n_cols, -1), acc_(n_cols), live_(n_cols, 0) {}

  bool insert(std::span<const RowEntry> row) {
    reduce(row);
    std::vector<std::pair<std::int32_t, T>> rest;
    collect(rest);
    if (rest.empty()) return false;
    remove_content(rest);

    std::size_t best = 0;
    for (std::size_t k = 1; k < rest.size(); ++k)
      if (better_pivot(rest[k], rest[best])) best = k;
    const auto pivot = rest[best].first;
    owner_[static_cast<std::size_t>(pivot)] = static_cast<std::int32_t>(basis_.size());
    nnz_ += rest.size();
    basis_.push_back({pivot, std::move(rest)});
    return true;
  }

  bool in_span(std::span<const RowEntry> row) {
    reduce(row);
    bool zero = true;
    for (auto c : touched_) {
      if (!Ops::is_zero(acc_[static_cast<std::size_t>(c)])) zero = false;
      acc_[static_cast<std::size_t>(c)] = T{};
      live_[static_cast<std::size_t>(c)] = 0;
    }
    touched_.clear();
    return zero;
  }

  std::size_t rank() const { return basis_.size(); }
  std::size_t nonzeros() const { return nnz_; }

 private:
  struct BasisRow {
    std::int32_t pivot;
    std::vector<std::pair<std::int32_t, T>> entries;  // sorted by column
  };

  std::uint32_t weight(std::int32_t c) const {
    return weight_ && !weight_->empty() ? (*weight_)[static_cast<std::size_t>(c)] : 0u;
  }

  bool better_pivot(const std::pair<std::int32_t, T>& a, const std::pair<std::int32_t, T>& b) const {
    const bool ua = Ops::is_unit(a.second), ub = Ops::is_unit(b.second);
    if (ua != ub) return ua;
    const auto wa = weight(a.first), wb = weight(b.first);
    if (wa != wb) return wa < wb;
    return a.first < b.first;
  }

  void touch(std::int32_t c) {
    auto& flag = live_[static_cast<std::size_t>(c)];
    if (flag) return;
    flag = 1;
    touched_.push_back(c);
    if (auto o = owner_[static_cast<std::size_t>(c)]; o >= 0) heap_.push(o);
  }

  // Leaves the reduced row in acc_/touched_.
  void reduce(std::span<const RowEntry> row) {
    for (const auto& e : row) {
      if (e.coefficient == 0) continue;
      touch(e.column);
      acc_[static_cast<std::size_t>(e.column)] = Ops::from(e.coefficient);
    }
    while (!heap_.empty()) {
      const auto bi = heap_.top();
      heap_.pop();
      const auto& b = basis_[static_cast<std::size_t>(bi)];
      const T a = acc_[static_cast<std::size_t>(b.pivot)];
      if (Ops::is_zero(a)) continue;

      const T& p = pivot_value(b);
      T g = Ops::gcd(p, a);
      T scale_r = Ops::div(p, g);
      T scale_b = Ops::div(a, g);
      if (Ops::negative(scale_r)) {
        scale_r = Ops::neg(scale_r);
        scale_b = Ops::neg(scale_b);
      }
      if (!(scale_r == Ops::from(1))) {
        for (auto c : touched_) {
          auto& v = acc_[static_cast<std::size_t>(c)];
          if (!Ops::is_zero(v)) v = Ops::mul(v, scale_r);
        }
      }
      for (const auto& [c, v] : b.entries) {
        touch(c);
        auto& slot = acc_[static_cast<std::size_t>(c)];
        slot = Ops::sub(slot, Ops::mul(scale_b, v));
      }
      if (!(scale_r == Ops::from(1))) shrink_acc();
    }
  }

  const T& pivot_value(const BasisRow& b) const {
    auto it = std::lower_bound(b.entries.begin(), b.entries.end(), b.pivot,
                               [](const auto& e, std::int32_t c) { return e.first < c; });
    return it->second;
  }

  void shrink_acc() {
    T g{};
    for (auto c : touched_) {
      const auto& v = acc_[static_cast<std::size_t>(c)];
      if (Ops::is_zero(v)) continue;
      g = Ops::is_zero(g) ? (Ops::negative(v) ? Ops::neg(v) : v) : Ops::gcd(g, v);
      if (Ops::is_unit(g)) return;
    }
    if (Ops::is_zero(g)) return;
    for (auto c : touched_) {
      auto& v = acc_[static_cast<std::size_t>(c)];
      if (!Ops::is_zero(v)) v = Ops::div(v, g);
    }
  }

  void collect(std::vector<std::pair<std::int32_t, T>>& out) {
    for (auto c : touched_) {
      auto& v = acc_[static_cast<std::size_t>(c)];
      if (!Ops::is_zero(v)) out.emplace_back(c, v);
      v = T{};
      live_[static_cast<std::size_t>(c)] = 0;
    }
    touched_.clear();
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  }

  static void remove_content(std::vector<std::pair<std::int32_t, T>>& row) {
    T g{};
    for (const auto& e : row) g = Ops::is_zero(g) ? (Ops::negative(e.second) ? Ops::neg(e.second) : e.second)
                                                  : Ops::gcd(g, e.second);
    if (Ops::is_unit(g)) return;
    for (auto& e : row) e.second = Ops::div(e.second, g);
  }

  const std::vector<std::uint32_t>* weight_;
  std::vector<std::int32_t> owner_;
  std::vector<BasisRow> basis_;
  std::size_t nnz_ = 0;
  std::vector<T> acc_;
  std::vector<char> live_;
  std::vector<std::int32_t> touched_;
  std::priority_queue<std::int32_t, std::vector<std::int32_t>, std::greater<>> heap_;
};

}  // namespace

struct IncrementalEchelon::Impl64 : EchelonCore<CheckedInt> {
  using EchelonCore::EchelonCore;
};
struct IncrementalEchelon::ImplBig : EchelonCore<BigInt> {
  using EchelonCore::EchelonCore;
};

IncrementalEchelon::IncrementalEchelon(std::size_t n_cols, std::vector<std::uint32_t> column_weight)
    : n_cols_(n_cols), weight_(std::make_shared<const std::vector<std::uint32_t>>(std::move(column_weight))) {
  if (!weight_->empty() && weight_->size() != n_cols_) throw std::invalid_argument("column weight size mismatch");
  small_ = std::make_unique<Impl64>(n_cols_, weight_.get());
}

IncrementalEchelon::~IncrementalEchelon() = default;
IncrementalEchelon::IncrementalEchelon(IncrementalEchelon&&) noexcept = default;
IncrementalEchelon& IncrementalEchelon::operator=(IncrementalEchelon&&) noexcept = default;

void IncrementalEchelon::promote() {
  big_ = std::make_unique<ImplBig>(n_cols_, weight_.get());
  small_.reset();
  for (const auto& r : accepted_) big_->insert(r);
}

bool IncrementalEchelon::insert(std::span<const RowEntry> row) {
  bool grew;
  if (small_) {
    try {
      grew = small_->insert(row);
    } catch (const Overflow&) {
      promote();
      grew = big_->insert(row);
    }
  } else {
    grew = big_->insert(row);
  }
  if (grew) accepted_.emplace_back(row.begin(), row.end());
  return grew;
}

bool IncrementalEchelon::in_span(std::span<const RowEntry> row) {
  if (small_) {
    try {
      return small_->in_span(row);
    } catch (const Overflow&) {
      promote();
    }
  }
  return big_->in_span(row);
}

std::size_t IncrementalEchelon::rank() const { return small_ ? small_->rank() : big_->rank(); }
bool IncrementalEchelon::uses_bignum() const { return !small_; }
std::size_t IncrementalEchelon::basis_nonzeros() const { return small_ ? small_->nonzeros() : big_->nonzeros(); }

}  // namespace gbpobs

namespace gbpobs {

namespace {

std::vector<std::uint32_t> column_weights(const SparseJacobian& j) {
  std::vector<std::uint32_t> w(j.cols());
  for (std::size_t c = 0; c < j.cols(); ++c)
    w[c] = static_cast<std::uint32_t>(j.column_rows(static_cast<BusIndex>(c)).size());
  return w;
}

// In-place reduced row echelon form; returns pivot columns in row order.
std::vector<std::size_t> rref(RationalMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && sgn(m(p, c)) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r)
      for (std::size_t k = 0; k < m.cols(); ++k) std::swap(m(p, k), m(r, k));
    const mpq_class inv = 1 / m(r, c);
    for (std::size_t k = c; k < m.cols(); ++k) m(r, k) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      const mpq_class f = m(i, c);
      for (std::size_t k = c; k < m.cols(); ++k) m(i, k) -= f * m(r, k);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

RationalMatrix::RationalMatrix(const SparseJacobian& j) : RationalMatrix(j.rows(), j.cols()) {
  for (std::size_t i = 0; i < j.rows(); ++i)
    for (const auto& e : j.row(i).entries) (*this)(i, static_cast<std::size_t>(e.column)) = static_cast<long>(e.coefficient);
}

RationalMatrix::RationalMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    for (long v : r) data_.emplace_back(v);
  }
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("dimension mismatch");
  RationalMatrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      if (sgn((*this)(i, k)) == 0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += (*this)(i, k) * rhs(k, j);
    }
  return out;
}

bool RationalMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const mpq_class& v) { return sgn(v) == 0; });
}

std::size_t row_rank(const SparseJacobian& j) {
  IncrementalEchelon e(j.cols(), column_weights(j));
  for (const auto& r : j.row_list()) e.insert(r.entries);
  return e.rank();
}

std::size_t row_rank(const RationalMatrix& m) {
  RationalMatrix copy = m;
  return rref(copy).size();
}

RowSplit independent_row_subset(const SparseJacobian& j) {
  IncrementalEchelon e(j.cols(), column_weights(j));
  RowSplit split;
  for (std::size_t i = 0; i < j.rows(); ++i) (e.insert(j.row(i).entries) ? split.kept : split.rejected).push_back(i);
  return split;
}

RationalMatrix null_space_basis(const RationalMatrix& m) {
  RationalMatrix r = m;
  const auto pivots = rref(r);
  std::vector<char> is_pivot(m.cols(), 0);
  for (auto c : pivots) is_pivot[c] = 1;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (!is_pivot[c]) free.push_back(c);

  RationalMatrix basis(m.cols(), free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    basis(free[k], k) = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) basis(pivots[i], k) = -r(i, free[k]);
  }
  return basis;
}

RationalMatrix null_space_basis(const SparseJacobian& j) { return null_space_basis(RationalMatrix(j)); }

}  // namespace gbpobs
