#pragma once

#include <cmath>
#include <vector>

#include "fedcorr/matrix.hpp"
#include "fedcorr/numerics.hpp"
#include "fedcorr/rng.hpp"

namespace fedcorr::testutil {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline ParamVector random_vector(Rng& rng, std::size_t n) {
  ParamVector v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Orthonormal p x r basis from the left singular vectors of a random
// gaussian matrix.
inline Matrix random_orthonormal(Rng& rng, std::size_t p, std::size_t r) {
  const SvdResult svd = thin_svd(random_matrix(rng, p, r));
  return svd.u.left_cols(r);
}

inline double max_abs_offdiag_gram(const Matrix& m) {
  // Largest |col_i . col_j| (i != j) and |col_i . col_i - 1| over columns.
  double worst = 0.0;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) dot += m(r, i) * m(r, j);
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(dot - target));
    }
  }
  return worst;
}

inline Matrix reconstruct(const SvdResult& svd) {
  Matrix scaled = svd.u;
  for (std::size_t j = 0; j < scaled.cols(); ++j)
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, j) *= svd.sigma[j];
  return matmul(scaled, svd.v.transposed());
}

}  // namespace fedcorr::testutil
