#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "gbpobs/network.hpp"

namespace gbpobs {

/// Dense matrix of GMP rationals. Only used where sizes are modest
/// (null spaces for tests and cross-checks); rank work on real systems goes
/// through IncrementalEchelon.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit RationalMatrix(const SparseJacobian& j);
  RationalMatrix(std::initializer_list<std::initializer_list<long>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  mpq_class& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const mpq_class& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RationalMatrix operator*(const RationalMatrix& rhs) const;
  bool is_zero() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<mpq_class> data_;
};

/// Row echelon basis over the rationals, grown one integer row at a time.
///
/// Rows are kept fraction-free: every elimination step is
/// r <- (p/g) r - (a/g) b with g = gcd(p, a), followed by content removal,
/// so entries stay integral and small. Arithmetic starts in checked 64-bit
/// integers and transparently replays into GMP integers on overflow.
/// Pivots prefer unit coefficients, then light columns (by the optional
/// static column weight), then the lowest column.
class IncrementalEchelon {
 public:
  explicit IncrementalEchelon(std::size_t n_cols, std::vector<std::uint32_t> column_weight = {});
  ~IncrementalEchelon();
  IncrementalEchelon(IncrementalEchelon&&) noexcept;
  IncrementalEchelon& operator=(IncrementalEchelon&&) noexcept;

  /// Adds the row if it is independent of the current basis.
  /// Returns true iff the rank grew.
  bool insert(std::span<const RowEntry> row);
  /// True iff the row lies in the span of the rows inserted so far.
  bool in_span(std::span<const RowEntry> row);

  std::size_t rank() const;
  std::size_t cols() const { return n_cols_; }
  /// True once the 64-bit path overflowed and GMP took over.
  bool uses_bignum() const;
  /// Total stored nonzeros in the basis, a fill diagnostic.
  std::size_t basis_nonzeros() const;

 private:
  struct Impl64;
  struct ImplBig;
  void promote();

  std::size_t n_cols_;
  std::shared_ptr<const std::vector<std::uint32_t>> weight_;
  std::unique_ptr<Impl64> small_;
  std::unique_ptr<ImplBig> big_;
  std::vector<std::vector<RowEntry>> accepted_;
};

struct RowSplit {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> rejected;
};

/// Exact rank over the rationals.
std::size_t row_rank(const SparseJacobian& j);
std::size_t row_rank(const RationalMatrix& m);

/// Greedy scan in row order: a row is kept iff it raises the exact rank of
/// the rows kept before it.
RowSplit independent_row_subset(const SparseJacobian& j);

/// Columns form an exact basis of {x : J x = 0}, one column per free
/// variable of the reduced row echelon form.
RationalMatrix null_space_basis(const SparseJacobian& j);
RationalMatrix null_space_basis(const RationalMatrix& m);

}  // namespace gbpobs
