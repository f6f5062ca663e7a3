#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fedcorr/matrix.hpp"
#include "fedcorr/metrics.hpp"
#include "fedcorr/updates.hpp"

namespace fedcorr {

// Top-k sparsified vector. Indices are zero-based, strictly increasing.
struct SparseResidual {
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
};

// Keeps ceil(fraction * d) largest-magnitude entries; ties go to the
// lower index.
SparseResidual topk_sparsify(std::span<const double> v, double fraction);
ParamVector expand(const SparseResidual& r);

// U_r^T * G: r x n compressed form of an update matrix.
Matrix svd_project_left(const UpdateMatrix& gm, const Matrix& u_r);
// U_r * coeffs: reconstruction for the projection above.
Matrix svd_reconstruct_left(const Matrix& coeffs, const Matrix& u_r);

// diag(U_r^T G V_r), r elements; the off-diagonal energy is dropped.
std::vector<double> svd_diag_encode(const UpdateMatrix& gm, const Matrix& u_r,
                                    const Matrix& v_r);
// U_r * diag(d) * V_r^T
Matrix svd_diag_decode(std::span<const double> diag, const Matrix& u_r,
                       const Matrix& v_r);

// Q_r^T (slice - mu)
std::vector<double> pca_compress(std::span<const double> slice,
                                 const PcaBasis& basis);
// Q_r * coeffs + mu
ParamVector pca_decompress(std::span<const double> coeffs,
                           const PcaBasis& basis);

// U_r^T g and U_r U_r^T g for a fixed orthonormal basis.
std::vector<double> subspace_project(std::span<const double> g,
                                     const Matrix& u_r);
ParamVector subspace_reconstruct(std::span<const double> coeffs,
                                 const Matrix& u_r);

// Sliding window of the last h reconstructed updates, newest first.
// Stored transposed (h rows of length d) so shifts and fits stay
// contiguous; column j of the d x h memory matrix is row j here.
class PredictorMemory {
 public:
  PredictorMemory() = default;
  PredictorMemory(std::size_t dim, std::size_t window)
      : dim_(dim), rows_(window, ParamVector(dim, 0.0)) {}

  std::size_t dim() const { return dim_; }
  std::size_t window() const { return rows_.size(); }
  std::size_t filled() const { return filled_; }
  std::span<const double> column(std::size_t j) const { return rows_[j]; }

  // Newest-first shift: drop the oldest column, prepend ghat.
  void shift_in(std::span<const double> ghat);

  // The filled columns as a d x filled matrix.
  Matrix filled_matrix() const;

  bool operator==(const PredictorMemory&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<ParamVector> rows_;
  std::size_t filled_ = 0;
};

// Least-squares combination weights of the filled history columns;
// always length window(), zero beyond filled().
std::vector<double> predictor_fit(const PredictorMemory& memory,
                                  std::span<const double> g);

// M * coeffs + expand(residual), evaluated column-by-column in a fixed
// order so client and server reconstructions match bit for bit.
ParamVector predictor_roundtrip(const PredictorMemory& memory,
                                std::span<const double> coeffs,
                                const SparseResidual& residual);

// The five client-to-server payload shapes.
struct RawPayload {
  ParamVector g;
};
struct SubspaceCoeffsPayload {
  std::vector<double> coeffs;
};
struct PcaSlicesPayload {
  std::vector<std::vector<double>> slices;  // per-slice coefficients
};
struct LowRankDiagPayload {
  std::vector<double> diag;
};
struct PredictivePayload {
  std::vector<double> coeffs;
  SparseResidual residual;
};

struct CompressedUpdate {
  std::variant<RawPayload, SubspaceCoeffsPayload, PcaSlicesPayload,
               LowRankDiagPayload, PredictivePayload>
      payload;

  // Transmitted value elements (the paper's counting unit).
  std::size_t uplink_element_count() const;
  // Index positions carried alongside sparse values, reported
  // separately so either accounting convention can be read off.
  std::size_t index_overhead() const;
};

}  // namespace fedcorr
