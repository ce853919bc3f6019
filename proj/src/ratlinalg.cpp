#include "svarspec/ratlinalg.hpp"

#include <algorithm>
#include <random>

#include "svarspec/errors.hpp"

namespace svarspec {

namespace {

void check_distinct(const std::vector<std::string>& labels, const char* axis) {
  std::vector<std::string> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw DimensionError(std::string("duplicate ") + axis + " label '" + *dup + "'");
  }
}

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

Poly lcm(const Poly& a, const Poly& b) {
  if (a.degree() == 0) return b;
  if (b.degree() == 0) return a;
  return divexact(a, gcd(a, b)) * b;
}

using PolyGrid = std::vector<std::vector<Poly>>;

struct Echelon {
  PolyGrid a;
  std::vector<std::size_t> pivot_cols;
  int sign = 1;
};

// Clears denominators row by row: returns the polynomial grid together with
// the per-row multipliers. Extra columns (right-hand sides) share the row scale.
PolyGrid clear_rows(const RatMatrix& m, const RatMatrix* rhs, std::vector<Poly>* scales) {
  const std::size_t extra = rhs ? rhs->cols() : 0;
  PolyGrid grid(m.rows());
  if (scales) scales->assign(m.rows(), Poly::constant(1));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Poly l = Poly::constant(1);
    for (std::size_t j = 0; j < m.cols(); ++j) l = lcm(l, m(i, j).den());
    for (std::size_t j = 0; j < extra; ++j) l = lcm(l, (*rhs)(i, j).den());
    auto scaled = [&l](const RatFn& r) {
      if (r.is_zero()) return Poly{};
      return r.den().degree() == 0 ? r.num() * l * (1 / r.den().leading())
                                   : r.num() * divexact(l, r.den());
    };
    grid[i].reserve(m.cols() + extra);
    for (std::size_t j = 0; j < m.cols(); ++j) grid[i].push_back(scaled(m(i, j)));
    for (std::size_t j = 0; j < extra; ++j) grid[i].push_back(scaled((*rhs)(i, j)));
    if (scales) (*scales)[i] = std::move(l);
  }
  return grid;
}

// Fraction-free row echelon form (Bareiss). Pivots are searched only in the
// first `elim_cols` columns; every column is updated. Each entry stays a minor
// of the scaled input, so the division by the previous pivot is exact.
Echelon bareiss(PolyGrid a, std::size_t elim_cols) {
  Echelon e;
  const std::size_t m = a.size();
  const std::size_t n = m ? a[0].size() : 0;
  Poly prev = Poly::constant(1);
  std::size_t r = 0;
  for (std::size_t c = 0; c < elim_cols && r < m; ++c) {
    std::size_t best = m;
    for (std::size_t i = r; i < m; ++i) {
      if (a[i][c].is_zero()) continue;
      if (best == m || a[i][c].degree() < a[best][c].degree()) best = i;
    }
    if (best == m) continue;
    if (best != r) {
      std::swap(a[best], a[r]);
      e.sign = -e.sign;
    }
    const Poly& piv = a[r][c];
    for (std::size_t i = r + 1; i < m; ++i) {
      const Poly lead = a[i][c];
      for (std::size_t j = c + 1; j < n; ++j) {
        Poly t = piv * a[i][j];
        if (!lead.is_zero() && !a[r][j].is_zero()) t -= lead * a[r][j];
        a[i][j] = prev.degree() == 0 && prev.leading() == 1 ? std::move(t) : divexact(t, prev);
      }
      a[i][c] = Poly{};
    }
    prev = a[r][c];
    e.pivot_cols.push_back(c);
    ++r;
  }
  e.a = std::move(a);
  return e;
}

}  // namespace

RatMatrix::RatMatrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)) {
  check_distinct(row_labels_, "row");
  check_distinct(col_labels_, "column");
  entries_.assign(row_labels_.size() * col_labels_.size(), RatFn());
}

RatMatrix::RatMatrix(std::size_t rows, std::size_t cols)
    : RatMatrix(index_labels(rows), index_labels(cols)) {}

RatMatrix RatMatrix::identity(const std::vector<std::string>& labels) {
  RatMatrix out(labels, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) out(i, i) = RatFn(1);
  return out;
}

std::size_t RatMatrix::row_index(const std::string& label) const {
  auto it = std::find(row_labels_.begin(), row_labels_.end(), label);
  if (it == row_labels_.end()) throw LabelError("unknown row label '" + label + "'");
  return static_cast<std::size_t>(it - row_labels_.begin());
}

std::size_t RatMatrix::col_index(const std::string& label) const {
  auto it = std::find(col_labels_.begin(), col_labels_.end(), label);
  if (it == col_labels_.end()) throw LabelError("unknown column label '" + label + "'");
  return static_cast<std::size_t>(it - col_labels_.begin());
}

const RatFn& RatMatrix::at(const std::string& row, const std::string& col) const {
  return (*this)(row_index(row), col_index(col));
}

RatFn& RatMatrix::at(const std::string& row, const std::string& col) {
  return (*this)(row_index(row), col_index(col));
}

bool RatMatrix::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const RatFn& r) { return r.is_zero(); });
}

RatMatrix submatrix(const RatMatrix& m, const std::vector<std::string>& rows,
                    const std::vector<std::string>& cols) {
  std::vector<std::size_t> ri, ci;
  for (const auto& r : rows) ri.push_back(m.row_index(r));
  for (const auto& c : cols) ci.push_back(m.col_index(c));
  RatMatrix out(rows, cols);
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ci.size(); ++j) out(i, j) = m(ri[i], ci[j]);
  return out;
}

RatMatrix transpose(const RatMatrix& m) {
  RatMatrix out(m.col_labels(), m.row_labels());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

RatMatrix conj_matrix(const RatMatrix& m) {
  RatMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).conj();
  return out;
}

RatMatrix multiply(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  RatMatrix out(a.row_labels(), b.col_labels());
  std::vector<RatFn> terms;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      terms.clear();
      for (std::size_t k = 0; k < a.cols(); ++k) {
        if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
        terms.push_back(a(i, k) * b(k, j));
      }
      out(i, j) = sum(terms);
    }
  }
  return out;
}

RatMatrix add(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  RatMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

RatMatrix subtract(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("subtract: shape mismatch");
  }
  RatMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

RatFn det(const RatMatrix& m) {
  if (!m.is_square()) throw DimensionError("det of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return RatFn(1);
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  std::vector<Poly> scales;
  Echelon e = bareiss(clear_rows(m, nullptr, &scales), n);
  if (e.pivot_cols.size() < n) return RatFn();
  Poly denom = Poly::constant(1);
  for (const auto& s : scales) denom *= s;
  Poly numer = e.a[n - 1][n - 1];
  if (e.sign < 0) numer = -numer;
  return RatFn(std::move(numer), std::move(denom));
}

int rank(const RatMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Echelon e = bareiss(clear_rows(m, nullptr, nullptr), m.cols());
  return static_cast<int>(e.pivot_cols.size());
}

int rational_rank(std::vector<std::vector<Rational>> a) {
  const std::size_t m = a.size();
  if (m == 0) return 0;
  const std::size_t n = a[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t p = r;
    while (p < m && a[p][c] == 0) ++p;
    if (p == m) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < m; ++i) {
      if (a[i][c] == 0) continue;
      const Rational f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return static_cast<int>(r);
}

int rank_eval(const RatMatrix& m, std::uint64_t seed, int trials) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num_dist(-97, 97);
  std::uniform_int_distribution<int> den_dist(1, 97);
  int best = 0;
  for (int t = 0; t < std::max(trials, 1); ++t) {
    Rational z;
    bool ok = false;
    while (!ok) {
      z = Rational(num_dist(rng), den_dist(rng));
      z.canonicalize();
      ok = true;
      for (std::size_t i = 0; i < m.rows() && ok; ++i)
        for (std::size_t j = 0; j < m.cols() && ok; ++j)
          if (m(i, j).den().eval(z) == 0) ok = false;
    }
    std::vector<std::vector<Rational>> a(m.rows(), std::vector<Rational>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = m(i, j).eval(z);
    best = std::max(best, rational_rank(std::move(a)));
  }
  return best;
}

RatMatrix solve(const RatMatrix& m, const RatMatrix& b) {
  if (!m.is_square()) throw DimensionError("solve: matrix is not square");
  if (b.rows() != m.rows()) throw DimensionError("solve: right-hand side has wrong length");
  const std::size_t n = m.rows();
  RatMatrix x(m.col_labels(), b.col_labels());
  if (n == 0) return x;
  Echelon e = bareiss(clear_rows(m, &b, nullptr), n);
  if (e.pivot_cols.size() < n) throw SingularMatrixError("solve: singular system");
  for (std::size_t k = 0; k < b.cols(); ++k) {
    for (std::size_t i = n; i-- > 0;) {
      RatFn acc(e.a[i][n + k]);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!e.a[i][j].is_zero()) acc -= RatFn(e.a[i][j]) * x(j, k);
      }
      x(i, k) = acc / RatFn(e.a[i][i]);
    }
  }
  return x;
}

std::vector<RatFn> solve(const RatMatrix& m, const std::vector<RatFn>& b) {
  RatMatrix rhs(m.row_labels(), {"b"});
  if (b.size() != m.rows()) throw DimensionError("solve: right-hand side has wrong length");
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  RatMatrix x = solve(m, rhs);
  std::vector<RatFn> out;
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(x(i, 0));
  return out;
}

RatMatrix inverse(const RatMatrix& m) {
  if (!m.is_square()) throw DimensionError("inverse of a non-square matrix");
  RatMatrix id(m.row_labels(), m.row_labels());
  for (std::size_t i = 0; i < m.rows(); ++i) id(i, i) = RatFn(1);
  RatMatrix x = solve(m, id);
  RatMatrix out(m.col_labels(), m.row_labels());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j);
  return out;
}

bool is_hermitian(const RatMatrix& m) {
  if (!m.is_square()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      if (m(i, j).conj() != m(j, i)) return false;
  return true;
}

}  // namespace svarspec
