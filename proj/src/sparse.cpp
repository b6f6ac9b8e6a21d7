#include "polydg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polydg {

SparseOperator::SparseOperator(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) {
    throw DimensionError("negative matrix dimension");
  }
}

SparseOperator SparseOperator::from_triplets(Index rows, Index cols,
                                             std::vector<Triplet> entries,
                                             double drop_tolerance) {
  SparseOperator out(rows, cols);
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw DimensionError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  // Stable sort keeps the summation order of duplicates identical to the
  // insertion order, so the result is reproducible bit for bit.
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  out.col_idx_.reserve(entries.size());
  out.values_.reserve(entries.size());
  std::size_t i = 0;
  while (i < entries.size()) {
    const Index r = entries[i].row;
    const Index c = entries[i].col;
    double sum = 0.0;
    while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
      sum += entries[i].value;
      ++i;
    }
    if (sum != 0.0 && std::abs(sum) > drop_tolerance) {
      out.col_idx_.push_back(c);
      out.values_.push_back(sum);
      ++out.row_ptr_[r + 1];
    }
  }
  for (Index r = 0; r < rows; ++r) {
    out.row_ptr_[r + 1] += out.row_ptr_[r];
  }
  return out;
}

SparseOperator SparseOperator::identity(Index n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseOperator SparseOperator::diagonal(std::span<const double> d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, d[i]});
  }
  return from_triplets(n, n, std::move(t));
}

SparseOperator SparseOperator::from_dense(const Eigen::MatrixXd& dense) {
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        t.push_back({i, j, dense(i, j)});
      }
    }
  }
  return from_triplets(static_cast<Index>(dense.rows()), static_cast<Index>(dense.cols()),
                       std::move(t));
}

double SparseOperator::coeff(Index row, Index col) const {
  const auto begin = col_idx_.begin() + row_ptr_[row];
  const auto end = col_idx_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) {
    return 0.0;
  }
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != cols_) {
    throw DimensionError("apply: vector of length " + std::to_string(x.size()) +
                         " for matrix with " + std::to_string(cols_) + " columns");
  }
  std::vector<double> y(rows_, 0.0);
  for (Index r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      s += values_[p] * x[col_idx_[p]];
    }
    y[r] = s;
  }
  return y;
}

std::vector<double> SparseOperator::apply_transpose(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != rows_) {
    throw DimensionError("apply_transpose: vector of length " + std::to_string(x.size()) +
                         " for matrix with " + std::to_string(rows_) + " rows");
  }
  std::vector<double> y(cols_, 0.0);
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      y[col_idx_[p]] += values_[p] * x[r];
    }
  }
  return y;
}

double SparseOperator::quadratic_form(std::span<const double> x) const {
  const auto y = apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += x[i] * y[i];
  }
  return s;
}

SparseOperator SparseOperator::transpose() const {
  SparseOperator t(cols_, rows_);
  t.col_idx_.resize(values_.size());
  t.values_.resize(values_.size());
  for (Index c : col_idx_) {
    ++t.row_ptr_[c + 1];
  }
  for (Index c = 0; c < cols_; ++c) {
    t.row_ptr_[c + 1] += t.row_ptr_[c];
  }
  std::vector<Index> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const Index dst = next[col_idx_[p]]++;
      t.col_idx_[dst] = r;
      t.values_[dst] = values_[p];
    }
  }
  return t;
}

SparseOperator SparseOperator::scale_columns(std::span<const double> s) const {
  if (static_cast<Index>(s.size()) != cols_) {
    throw DimensionError("scale_columns: length mismatch");
  }
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      t.push_back({r, col_idx_[p], values_[p] * s[col_idx_[p]]});
    }
  }
  return from_triplets(rows_, cols_, std::move(t));
}

std::vector<double> SparseOperator::diagonal_entries() const {
  const Index n = std::min(rows_, cols_);
  std::vector<double> d(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    d[i] = coeff(i, i);
  }
  return d;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      d(r, col_idx_[p]) = values_[p];
    }
  }
  return d;
}

Eigen::SparseMatrix<double> SparseOperator::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      t.emplace_back(r, col_idx_[p], values_[p]);
    }
  }
  Eigen::SparseMatrix<double> m(rows_, cols_);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

std::vector<Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      t.push_back({r, col_idx_[p], values_[p]});
    }
  }
  return t;
}

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b,
                        double relative_drop) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ") * (" + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
  const auto arp = a.row_ptr();
  const auto aci = a.col_idx();
  const auto av = a.values();
  const auto brp = b.row_ptr();
  const auto bci = b.col_idx();
  const auto bv = b.values();

  // Gustavson row-by-row product with a dense accumulator. Column indices
  // of each output row are sorted before emission.
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<Index> marker(b.cols(), -1);
  std::vector<Index> pattern;
  std::vector<Index> out_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> out_col;
  std::vector<double> out_val;
  for (Index r = 0; r < a.rows(); ++r) {
    pattern.clear();
    for (Index p = arp[r]; p < arp[r + 1]; ++p) {
      const Index k = aci[p];
      const double akv = av[p];
      for (Index q = brp[k]; q < brp[k + 1]; ++q) {
        const Index c = bci[q];
        if (marker[c] != r) {
          marker[c] = r;
          acc[c] = 0.0;
          pattern.push_back(c);
        }
        acc[c] += akv * bv[q];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (Index c : pattern) {
      if (acc[c] != 0.0) {
        out_col.push_back(c);
        out_val.push_back(acc[c]);
      }
    }
    out_ptr[r + 1] = static_cast<Index>(out_col.size());
  }

  double maxv = 0.0;
  for (double v : out_val) {
    maxv = std::max(maxv, std::abs(v));
  }
  const double tol = relative_drop * maxv;
  std::vector<Triplet> t;
  t.reserve(out_val.size());
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = out_ptr[r]; p < out_ptr[r + 1]; ++p) {
      t.push_back({r, out_col[p], out_val[p]});
    }
  }
  return SparseOperator::from_triplets(a.rows(), b.cols(), std::move(t), tol);
}

SparseOperator add(const SparseOperator& a, const SparseOperator& b, double alpha,
                   double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("add: shape mismatch");
  }
  auto ta = a.triplets();
  auto tb = b.triplets();
  std::vector<Triplet> t;
  t.reserve(ta.size() + tb.size());
  for (auto& e : ta) {
    t.push_back({e.row, e.col, alpha * e.value});
  }
  for (auto& e : tb) {
    t.push_back({e.row, e.col, beta * e.value});
  }
  return SparseOperator::from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseOperator galerkin_transform(const SparseOperator& a, const SparseOperator& m) {
  if (m.cols() != a.rows() || a.rows() != a.cols()) {
    throw DimensionError("galerkin_transform: M is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", A is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
  constexpr double kDrop = 1e-15;
  const SparseOperator ma = multiply(m, a);
  return multiply(ma, m.transpose(), kDrop);
}

double relative_asymmetry(const SparseOperator& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("relative_asymmetry: matrix not square");
  }
  const double scale = a.max_abs();
  if (scale == 0.0) {
    return 0.0;
  }
  const SparseOperator diff = add(a, a.transpose(), 1.0, -1.0);
  return diff.max_abs() / scale;
}

}  // namespace polydg
