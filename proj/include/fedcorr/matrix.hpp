#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedcorr {

// Flat parameter vector: a model, a model update, or one slice of one.
using ParamVector = std::vector<double>;

// Dense row-major matrix. Zero rows/cols are allowed so that empty
// bases (rank 0) are representable.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);
  // Columns are the given vectors, in order. All must share a length.
  static Matrix from_columns(const std::vector<ParamVector>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
  std::span<const double> row_span(std::size_t i) const {
    return {row(i), cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  ParamVector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> v);

  Matrix transposed() const;
  // Columns [0, r) as a new matrix.
  Matrix left_cols(std::size_t r) const;
  void negate_col(std::size_t j);

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// y = a * x
ParamVector matvec(const Matrix& a, std::span<const double> x);
// y = a^T * x
ParamVector matvec_transposed(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double frobenius_dist(const Matrix& a, const Matrix& b);

double norm(std::span<const double> v);
double norm_sq(std::span<const double> v);

}  // namespace fedcorr
