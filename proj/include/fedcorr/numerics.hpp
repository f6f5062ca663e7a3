#pragma once

#include <span>
#include <vector>

#include "fedcorr/matrix.hpp"

namespace fedcorr {

// Thin SVD a = u * diag(sigma) * v^T with k = min(rows, cols) columns.
// sigma is sorted non-increasing; ties keep the factorization order.
// Deterministic sign convention: the first entry of each u-column whose
// magnitude exceeds 1e-12 is non-negative (the paired v-column is
// flipped with it so the product is unchanged).
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};

// Eigendecomposition q * diag(lambda) * q^T of a symmetric matrix,
// lambda sorted non-increasing, same sign convention as SvdResult.
struct EigResult {
  Matrix q;
  std::vector<double> lambda;
};

SvdResult thin_svd(const Matrix& a);

// Input is symmetrized as (c + c^T)/2 before factorization.
EigResult sym_eig_desc(const Matrix& c);

// Minimum-Euclidean-norm minimizer of |g - m*a|. Rank deficiency is
// handled with pseudoinverse semantics: singular values below
// 1e-12 * sigma_max are dropped.
std::vector<double> lstsq_minnorm(const Matrix& m, std::span<const double> g);

}  // namespace fedcorr
