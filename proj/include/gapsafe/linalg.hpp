#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "gapsafe/errors.hpp"

namespace gapsafe {

/// Row-major dense matrix. Holds coefficients B (p x q), dual points and
/// targets (n x q).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t k) noexcept { return values_[i * cols_ + k]; }
  double operator()(std::size_t i, std::size_t k) const noexcept { return values_[i * cols_ + k]; }

  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double v);
  bool row_is_zero(std::size_t i) const noexcept;

  double frobenius_norm() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b);
double l2_norm(std::span<const double> v) noexcept;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// n x p design matrix, stored dense column-major or compressed sparse
/// column. Immutable after construction; column norms are computed on first
/// access and shared between copies.
class DesignMatrix {
 public:
  DesignMatrix() : DesignMatrix(dense_col_major(0, 0, {})) {}

  static DesignMatrix dense_col_major(std::size_t n, std::size_t p, std::vector<double> values);
  static DesignMatrix dense_row_major(std::size_t n, std::size_t p, std::span<const double> values);
  static DesignMatrix from_dense(const DenseMatrix& m);
  /// Validates the CSC invariants; throws ContractError on violation.
  static DesignMatrix sparse(std::size_t n, std::size_t p, std::vector<std::size_t> col_ptr,
                             std::vector<std::size_t> row_idx, std::vector<double> values);
  /// Duplicates are summed; explicit zeros are kept.
  static DesignMatrix from_triplets(std::size_t n, std::size_t p, std::vector<Triplet> triplets);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  bool is_sparse() const noexcept { return sparse_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  template <class F>
  void for_each_in_col(std::size_t j, F&& f) const {
    if (sparse_) {
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) f(row_idx_[k], values_[k]);
    } else {
      const double* col = values_.data() + j * n_;
      for (std::size_t i = 0; i < n_; ++i) f(i, col[i]);
    }
  }

  double col_norm(std::size_t j) const;
  double col_sq_norm(std::size_t j) const;

  /// x^(j)^T M written into out (length M.cols()).
  void col_dot_mat_into(std::size_t j, const DenseMatrix& M, std::span<double> out) const;

  /// Z = X B.
  DenseMatrix multiply(const DenseMatrix& B) const;

  DenseMatrix to_dense() const;
  DesignMatrix to_sparse() const;

  // Raw CSC access (valid only when is_sparse()).
  std::span<const std::size_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const std::size_t> row_idx() const noexcept { return row_idx_; }
  std::span<const double> nonzeros() const noexcept { return values_; }

 private:
  struct NormCache {
    std::once_flag once;
    std::vector<double> sq_norms;
  };

  DesignMatrix(std::size_t n, std::size_t p, bool sparse, std::vector<std::size_t> col_ptr,
               std::vector<std::size_t> row_idx, std::vector<double> values);

  const std::vector<double>& sq_norms() const;
  void check_col(std::size_t j) const;

  std::size_t n_ = 0;
  std::size_t p_ = 0;
  bool sparse_ = false;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
  std::shared_ptr<NormCache> norms_;
};

std::vector<double> col_dot_mat(const DesignMatrix& X, std::size_t j, const DenseMatrix& M);
double col_norm(const DesignMatrix& X, std::size_t j);
/// Z <- Z + x^(j) delta^T.
void add_scaled_outer(DenseMatrix& Z, const DesignMatrix& X, std::size_t j,
                      std::span<const double> delta);

}  // namespace gapsafe
