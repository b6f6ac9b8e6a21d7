#pragma once

#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "polydg/common.hpp"

namespace polydg {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix in canonical form: column indices sorted
/// within each row, no duplicates, no stored zeros.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(Index rows, Index cols);

  /// Duplicates are summed in (row, col) order; entries with
  /// |value| <= drop_tolerance after summation are discarded.
  static SparseOperator from_triplets(Index rows, Index cols, std::vector<Triplet> entries,
                                      double drop_tolerance = 0.0);
  static SparseOperator identity(Index n);
  static SparseOperator diagonal(std::span<const double> d);
  static SparseOperator from_dense(const Eigen::MatrixXd& dense);

  [[nodiscard]] Index rows() const { return rows_; }
  [[nodiscard]] Index cols() const { return cols_; }
  [[nodiscard]] std::size_t nnz() const { return values_.size(); }

  [[nodiscard]] std::span<const Index> row_ptr() const { return row_ptr_; }
  [[nodiscard]] std::span<const Index> col_idx() const { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  [[nodiscard]] double coeff(Index row, Index col) const;
  [[nodiscard]] double max_abs() const;

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> apply_transpose(std::span<const double> x) const;
  [[nodiscard]] double quadratic_form(std::span<const double> x) const;

  [[nodiscard]] SparseOperator transpose() const;
  [[nodiscard]] SparseOperator scale_columns(std::span<const double> s) const;
  [[nodiscard]] std::vector<double> diagonal_entries() const;

  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] Eigen::SparseMatrix<double> to_eigen() const;
  [[nodiscard]] std::vector<Triplet> triplets() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// C = A * B. Entries with |c| <= relative_drop * max|C| are removed.
SparseOperator multiply(const SparseOperator& a, const SparseOperator& b,
                        double relative_drop = 0.0);

/// alpha * A + beta * B.
SparseOperator add(const SparseOperator& a, const SparseOperator& b, double alpha = 1.0,
                   double beta = 1.0);

/// M * A * M^T, computed as two sparse products with structural zeros
/// dropped below 1e-15 * max|entry|.
SparseOperator galerkin_transform(const SparseOperator& a, const SparseOperator& m);

/// max_ij |A_ij - A_ji| / max_ij |A_ij| (0 for the zero matrix).
double relative_asymmetry(const SparseOperator& a);

}  // namespace polydg
