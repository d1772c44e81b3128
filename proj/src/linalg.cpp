#include "gapsafe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gapsafe {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ContractError("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                        " values, got " + std::to_string(values_.size()));
  }
}

DenseMatrix DenseMatrix::column(std::span<const double> v) {
  return DenseMatrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

void DenseMatrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool DenseMatrix::row_is_zero(std::size_t i) const noexcept {
  auto r = row(i);
  return std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; });
}

double DenseMatrix::frobenius_norm() const noexcept { return l2_norm(values_); }

double l2_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError("frobenius_distance: shape mismatch");
  }
  double s = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) {
    const double d = av[k] - bv[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError("frobenius_dot: shape mismatch");
  }
  double s = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
  return s;
}

// ---------------------------------------------------------------------------

DesignMatrix::DesignMatrix(std::size_t n, std::size_t p, bool sparse,
                           std::vector<std::size_t> col_ptr, std::vector<std::size_t> row_idx,
                           std::vector<double> values)
    : n_(n),
      p_(p),
      sparse_(sparse),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)),
      norms_(std::make_shared<NormCache>()) {}

DesignMatrix DesignMatrix::dense_col_major(std::size_t n, std::size_t p,
                                           std::vector<double> values) {
  if (values.size() != n * p) {
    throw ContractError("DesignMatrix: dense storage needs n*p values");
  }
  return DesignMatrix(n, p, false, {}, {}, std::move(values));
}

DesignMatrix DesignMatrix::dense_row_major(std::size_t n, std::size_t p,
                                           std::span<const double> values) {
  if (values.size() != n * p) {
    throw ContractError("DesignMatrix: dense storage needs n*p values");
  }
  std::vector<double> cm(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) cm[j * n + i] = values[i * p + j];
  return dense_col_major(n, p, std::move(cm));
}

DesignMatrix DesignMatrix::from_dense(const DenseMatrix& m) {
  return dense_row_major(m.rows(), m.cols(), m.values());
}

DesignMatrix DesignMatrix::sparse(std::size_t n, std::size_t p, std::vector<std::size_t> col_ptr,
                                  std::vector<std::size_t> row_idx, std::vector<double> values) {
  if (col_ptr.size() != p + 1 || col_ptr.front() != 0) {
    throw ContractError("DesignMatrix: column pointer array must have p+1 entries starting at 0");
  }
  if (row_idx.size() != values.size() || col_ptr.back() != values.size()) {
    throw ContractError("DesignMatrix: nonzero count disagrees with column pointers");
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (col_ptr[j + 1] < col_ptr[j]) {
      throw ContractError("DesignMatrix: column pointers must be nondecreasing");
    }
    for (std::size_t k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
      if (row_idx[k] >= n) throw ContractError("DesignMatrix: row index out of range");
      if (k > col_ptr[j] && row_idx[k] <= row_idx[k - 1]) {
        throw ContractError("DesignMatrix: row indices must be strictly increasing per column");
      }
    }
  }
  return DesignMatrix(n, p, true, std::move(col_ptr), std::move(row_idx), std::move(values));
}

DesignMatrix DesignMatrix::from_triplets(std::size_t n, std::size_t p,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= p) throw ContractError("DesignMatrix: triplet out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  std::vector<std::size_t> col_ptr(p + 1, 0);
  std::vector<std::size_t> rows;
  std::vector<double> vals;
  rows.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (k > 0 && triplets[k - 1].col == t.col && triplets[k - 1].row == t.row) {
      vals.back() += t.value;
      continue;
    }
    rows.push_back(t.row);
    vals.push_back(t.value);
    ++col_ptr[t.col + 1];
  }
  for (std::size_t j = 0; j < p; ++j) col_ptr[j + 1] += col_ptr[j];
  return sparse(n, p, std::move(col_ptr), std::move(rows), std::move(vals));
}

void DesignMatrix::check_col(std::size_t j) const {
  if (j >= p_) {
    throw ContractError("DesignMatrix: column " + std::to_string(j) + " out of range (p=" +
                        std::to_string(p_) + ")");
  }
}

const std::vector<double>& DesignMatrix::sq_norms() const {
  std::call_once(norms_->once, [this] {
    auto& sq = norms_->sq_norms;
    sq.assign(p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j) {
      double s = 0.0;
      for_each_in_col(j, [&](std::size_t, double v) { s += v * v; });
      sq[j] = s;
    }
  });
  return norms_->sq_norms;
}

double DesignMatrix::col_sq_norm(std::size_t j) const {
  check_col(j);
  return sq_norms()[j];
}

double DesignMatrix::col_norm(std::size_t j) const { return std::sqrt(col_sq_norm(j)); }

void DesignMatrix::col_dot_mat_into(std::size_t j, const DenseMatrix& M,
                                    std::span<double> out) const {
  check_col(j);
  if (M.rows() != n_ || out.size() != M.cols()) {
    throw ContractError("col_dot_mat: M must be n x q and out of length q");
  }
  const std::size_t q = M.cols();
  std::fill(out.begin(), out.end(), 0.0);
  if (q == 1) {
    double s = 0.0;
    auto mv = M.values();
    for_each_in_col(j, [&](std::size_t i, double v) { s += v * mv[i]; });
    out[0] = s;
    return;
  }
  for_each_in_col(j, [&](std::size_t i, double v) {
    auto r = M.row(i);
    for (std::size_t k = 0; k < q; ++k) out[k] += v * r[k];
  });
}

DenseMatrix DesignMatrix::multiply(const DenseMatrix& B) const {
  if (B.rows() != p_) throw ContractError("DesignMatrix::multiply: B must have p rows");
  DenseMatrix Z(n_, B.cols());
  for (std::size_t j = 0; j < p_; ++j) {
    if (B.row_is_zero(j)) continue;
    add_scaled_outer(Z, *this, j, B.row(j));
  }
  return Z;
}

DenseMatrix DesignMatrix::to_dense() const {
  DenseMatrix m(n_, p_);
  for (std::size_t j = 0; j < p_; ++j) for_each_in_col(j, [&](std::size_t i, double v) {
      m(i, j) = v;
    });
  return m;
}

DesignMatrix DesignMatrix::to_sparse() const {
  if (sparse_) return *this;
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < p_; ++j) for_each_in_col(j, [&](std::size_t i, double v) {
      if (v != 0.0) t.push_back({i, j, v});
    });
  return from_triplets(n_, p_, std::move(t));
}

// ---------------------------------------------------------------------------

std::vector<double> col_dot_mat(const DesignMatrix& X, std::size_t j, const DenseMatrix& M) {
  std::vector<double> out(M.cols());
  X.col_dot_mat_into(j, M, out);
  return out;
}

double col_norm(const DesignMatrix& X, std::size_t j) { return X.col_norm(j); }

void add_scaled_outer(DenseMatrix& Z, const DesignMatrix& X, std::size_t j,
                      std::span<const double> delta) {
  if (j >= X.p()) throw ContractError("add_scaled_outer: column out of range");
  if (Z.rows() != X.n() || Z.cols() != delta.size()) {
    throw ContractError("add_scaled_outer: Z must be n x q with delta of length q");
  }
  const std::size_t q = delta.size();
  if (q == 1) {
    const double d = delta[0];
    if (d == 0.0) return;
    auto zv = Z.values();
    X.for_each_in_col(j, [&](std::size_t i, double v) { zv[i] += v * d; });
    return;
  }
  X.for_each_in_col(j, [&](std::size_t i, double v) {
    auto r = Z.row(i);
    for (std::size_t k = 0; k < q; ++k) r[k] += v * delta[k];
  });
}

}  // namespace gapsafe
