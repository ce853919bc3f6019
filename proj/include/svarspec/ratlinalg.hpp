#pragma once

// Dense matrices over Q(z) indexed by process labels.

#include <cstdint>
#include <string>
#include <vector>

#include "svarspec/ratfield.hpp"

namespace svarspec {

class RatMatrix {
 public:
  RatMatrix() = default;
  /// Zero matrix. Throws DimensionError on duplicate labels.
  RatMatrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels);
  /// Unlabeled matrix; labels become "0", "1", ...
  RatMatrix(std::size_t rows, std::size_t cols);

  static RatMatrix identity(const std::vector<std::string>& labels);

  std::size_t rows() const { return row_labels_.size(); }
  std::size_t cols() const { return col_labels_.size(); }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  RatFn& operator()(std::size_t i, std::size_t j) { return entries_[i * cols() + j]; }
  const RatFn& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols() + j]; }
  /// Lookup by labels; throws LabelError.
  const RatFn& at(const std::string& row, const std::string& col) const;
  RatFn& at(const std::string& row, const std::string& col);

  std::size_t row_index(const std::string& label) const;
  std::size_t col_index(const std::string& label) const;

  bool is_square() const { return rows() == cols(); }
  bool is_zero() const;

  friend bool operator==(const RatMatrix& a, const RatMatrix& b) {
    return a.row_labels_ == b.row_labels_ && a.col_labels_ == b.col_labels_ &&
           a.entries_ == b.entries_;
  }
  friend bool operator!=(const RatMatrix& a, const RatMatrix& b) { return !(a == b); }

 private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<RatFn> entries_;
};

/// [M]_{X,Y}, keeping the order of X and Y as given. Throws LabelError.
RatMatrix submatrix(const RatMatrix& m, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols);

RatMatrix transpose(const RatMatrix& m);
/// Entrywise conjugation.
RatMatrix conj_matrix(const RatMatrix& m);
/// Requires a.cols() == b.rows(); labels are taken from a's rows and b's columns.
RatMatrix multiply(const RatMatrix& a, const RatMatrix& b);
RatMatrix add(const RatMatrix& a, const RatMatrix& b);
RatMatrix subtract(const RatMatrix& a, const RatMatrix& b);

/// Fraction-free determinant; det of the 0x0 matrix is 1.
RatFn det(const RatMatrix& m);
int rank(const RatMatrix& m);
/// Rank after substituting random rationals for z (avoiding poles), maximized
/// over `trials` substitutions. Never exceeds rank(m).
int rank_eval(const RatMatrix& m, std::uint64_t seed, int trials = 3);

/// Solves m x = b for square nonsingular m. Throws SingularMatrixError.
std::vector<RatFn> solve(const RatMatrix& m, const std::vector<RatFn>& b);
/// Solves m X = B column by column with a single elimination.
RatMatrix solve(const RatMatrix& m, const RatMatrix& b);
RatMatrix inverse(const RatMatrix& m);

/// R* == R^T entrywise (Hermitian on the unit circle).
bool is_hermitian(const RatMatrix& m);

/// Exact rank of a rational matrix given row-major.
int rational_rank(std::vector<std::vector<Rational>> a);

}  // namespace svarspec
