#include "fedcorr/matrix.hpp"

#include <cmath>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"

namespace fedcorr {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<ParamVector>& columns) {
  if (columns.empty()) return Matrix();
  const std::size_t rows = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows)
      throw ShapeMismatch("from_columns: columns differ in length");
  }
  Matrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

ParamVector Matrix::col(std::size_t j) const {
  ParamVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_col(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw ShapeMismatch("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Matrix Matrix::left_cols(std::size_t r) const {
  if (r > cols_) throw ShapeMismatch("left_cols: r exceeds column count");
  Matrix out(rows_, r);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < r; ++j) out(i, j) = (*this)(i, j);
  }
  return out;
}

void Matrix::negate_col(std::size_t j) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = -(*this)(i, j);
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeMismatch("matmul: inner dims differ");
  Matrix c(a.rows(), b.cols());
  // axpy over rows of b keeps the inner loop contiguous.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) kernels::axpy(aik, b.row(k), ci, b.cols());
    }
  }
  return c;
}

ParamVector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ShapeMismatch("matvec: dims differ");
  ParamVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = kernels::dot(a.row(i), x.data(), a.cols());
  return y;
}

ParamVector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size())
    throw ShapeMismatch("matvec_transposed: dims differ");
  ParamVector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] != 0.0) kernels::axpy(x[i], a.row(i), y.data(), a.cols());
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  return std::sqrt(kernels::sum_sq(a.data(), a.size()));
}

double frobenius_dist(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("frobenius_dist: shapes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double norm(std::span<const double> v) {
  return std::sqrt(kernels::sum_sq(v.data(), v.size()));
}

double norm_sq(std::span<const double> v) {
  return kernels::sum_sq(v.data(), v.size());
}

}  // namespace fedcorr
