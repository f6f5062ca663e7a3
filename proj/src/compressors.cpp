#include "fedcorr/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"
#include "fedcorr/numerics.hpp"

namespace fedcorr {

SparseResidual topk_sparsify(std::span<const double> v, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw InvalidInput("topk_sparsify: fraction must lie in (0, 1]");
  const std::size_t d = v.size();
  if (d == 0) throw InvalidInput("topk_sparsify: empty vector");
  const std::size_t k = std::min(
      d, static_cast<std::size_t>(
             std::ceil(fraction * static_cast<double>(d) - 1e-9)));

  std::vector<std::uint32_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  // Ties resolved toward the lower index by the stability of the order
  // on equal magnitudes.
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  idx.resize(std::max<std::size_t>(k, 1));
  std::sort(idx.begin(), idx.end());

  SparseResidual out;
  out.dim = d;
  out.indices = std::move(idx);
  out.values.reserve(out.indices.size());
  for (std::uint32_t i : out.indices) out.values.push_back(v[i]);
  return out;
}

ParamVector expand(const SparseResidual& r) {
  if (r.indices.size() != r.values.size())
    throw InvalidInput("expand: index/value length mismatch");
  ParamVector out(r.dim, 0.0);
  for (std::size_t i = 0; i < r.indices.size(); ++i) {
    if (r.indices[i] >= r.dim) throw InvalidInput("expand: index out of range");
    out[r.indices[i]] = r.values[i];
  }
  return out;
}

Matrix svd_project_left(const UpdateMatrix& gm, const Matrix& u_r) {
  if (u_r.rows() != gm.g_mat.rows())
    throw ShapeMismatch("svd_project_left: basis rows != matrix rows");
  // (U_r^T G)(i, :) = sum_k U_r(k, i) * G(k, :)
  Matrix out(u_r.cols(), gm.g_mat.cols());
  for (std::size_t k = 0; k < u_r.rows(); ++k) {
    for (std::size_t i = 0; i < u_r.cols(); ++i) {
      const double w = u_r(k, i);
      if (w != 0.0) kernels::axpy(w, gm.g_mat.row(k), out.row(i), out.cols());
    }
  }
  return out;
}

Matrix svd_reconstruct_left(const Matrix& coeffs, const Matrix& u_r) {
  if (coeffs.rows() != u_r.cols())
    throw ShapeMismatch("svd_reconstruct_left: rank mismatch");
  return matmul(u_r, coeffs);
}

std::vector<double> svd_diag_encode(const UpdateMatrix& gm, const Matrix& u_r,
                                    const Matrix& v_r) {
  const Matrix& g = gm.g_mat;
  if (u_r.rows() != g.rows() || v_r.rows() != g.cols() ||
      u_r.cols() != v_r.cols())
    throw ShapeMismatch("svd_diag_encode: dims differ");
  const std::size_t r = u_r.cols();
  std::vector<double> diag(r);
  for (std::size_t i = 0; i < r; ++i) {
    // d_i = u_i^T G v_i
    const ParamVector gv = matvec(g, v_r.col(i));
    diag[i] = kernels::dot(u_r.col(i).data(), gv.data(), gv.size());
  }
  return diag;
}

Matrix svd_diag_decode(std::span<const double> diag, const Matrix& u_r,
                       const Matrix& v_r) {
  if (diag.size() != u_r.cols() || diag.size() != v_r.cols())
    throw ShapeMismatch("svd_diag_decode: rank mismatch");
  Matrix out(u_r.rows(), v_r.rows());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const ParamVector ui = u_r.col(i);
    const ParamVector vi = v_r.col(i);
    for (std::size_t row = 0; row < out.rows(); ++row) {
      const double w = diag[i] * ui[row];
      if (w != 0.0) kernels::axpy(w, vi.data(), out.row(row), out.cols());
    }
  }
  return out;
}

std::vector<double> pca_compress(std::span<const double> slice,
                                 const PcaBasis& basis) {
  if (slice.size() != basis.mu.size())
    throw ShapeMismatch("pca_compress: slice length != basis dimension");
  ParamVector centered(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i)
    centered[i] = slice[i] - basis.mu[i];
  return matvec_transposed(basis.q_r, centered);
}

ParamVector pca_decompress(std::span<const double> coeffs,
                           const PcaBasis& basis) {
  if (coeffs.size() != basis.rank)
    throw ShapeMismatch("pca_decompress: coefficient count != rank");
  ParamVector out = basis.mu;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0) {
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += coeffs[j] * basis.q_r(i, j);
    }
  }
  return out;
}

std::vector<double> subspace_project(std::span<const double> g,
                                     const Matrix& u_r) {
  if (g.size() != u_r.rows())
    throw ShapeMismatch("subspace_project: dims differ");
  return matvec_transposed(u_r, g);
}

ParamVector subspace_reconstruct(std::span<const double> coeffs,
                                 const Matrix& u_r) {
  if (coeffs.size() != u_r.cols())
    throw ShapeMismatch("subspace_reconstruct: dims differ");
  return matvec(u_r, coeffs);
}

void PredictorMemory::shift_in(std::span<const double> ghat) {
  if (ghat.size() != dim_) throw ShapeMismatch("shift_in: dims differ");
  if (rows_.empty()) return;
  for (std::size_t j = rows_.size(); j-- > 1;) rows_[j] = rows_[j - 1];
  rows_[0].assign(ghat.begin(), ghat.end());
  filled_ = std::min(filled_ + 1, rows_.size());
}

Matrix PredictorMemory::filled_matrix() const {
  Matrix m(dim_, filled_);
  for (std::size_t j = 0; j < filled_; ++j) {
    for (std::size_t i = 0; i < dim_; ++i) m(i, j) = rows_[j][i];
  }
  return m;
}

std::vector<double> predictor_fit(const PredictorMemory& memory,
                                  std::span<const double> g) {
  if (g.size() != memory.dim()) throw ShapeMismatch("predictor_fit: dims differ");
  std::vector<double> coeffs(memory.window(), 0.0);
  if (memory.filled() == 0) return coeffs;  // cold start: all-residual
  const std::vector<double> fitted =
      lstsq_minnorm(memory.filled_matrix(), g);
  std::copy(fitted.begin(), fitted.end(), coeffs.begin());
  return coeffs;
}

ParamVector predictor_roundtrip(const PredictorMemory& memory,
                                std::span<const double> coeffs,
                                const SparseResidual& residual) {
  if (coeffs.size() != memory.window())
    throw ShapeMismatch("predictor_roundtrip: coefficient count != window");
  if (residual.dim != memory.dim())
    throw ShapeMismatch("predictor_roundtrip: residual dimension differs");
  ParamVector out = expand(residual);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0)
      kernels::axpy(coeffs[j], memory.column(j).data(), out.data(), out.size());
  }
  return out;
}

std::size_t CompressedUpdate::uplink_element_count() const {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RawPayload>) {
          return p.g.size();
        } else if constexpr (std::is_same_v<T, SubspaceCoeffsPayload>) {
          return p.coeffs.size();
        } else if constexpr (std::is_same_v<T, PcaSlicesPayload>) {
          std::size_t total = 0;
          for (const auto& s : p.slices) total += s.size();
          return total;
        } else if constexpr (std::is_same_v<T, LowRankDiagPayload>) {
          return p.diag.size();
        } else {
          return p.coeffs.size() + p.residual.values.size();
        }
      },
      payload);
}

std::size_t CompressedUpdate::index_overhead() const {
  if (const auto* pred = std::get_if<PredictivePayload>(&payload))
    return pred->residual.indices.size();
  return 0;
}

}  // namespace fedcorr
