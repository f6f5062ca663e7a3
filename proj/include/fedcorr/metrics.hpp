#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fedcorr/matrix.hpp"

namespace fedcorr {

// Truncated SVD basis kept after an energy-threshold narrowing step.
struct TruncatedSvd {
  Matrix u_r;                  // p x r
  std::vector<double> sigma_r;  // length r
  Matrix v_r;                  // q x r
  std::size_t rank = 0;
};

// Affine PCA basis: q_r (p x r) plus the sample mean. r = 0 is valid
// and means the mean alone carries enough energy.
struct PcaBasis {
  Matrix q_r;
  ParamVector mu;
  std::size_t rank = 0;
};

// Result of fitting a PCA model to a sample set. lambda holds the
// min(p, sample_count) leading covariance eigenvalues (the rest are
// structurally zero); q holds the matching principal directions.
struct PcaFit {
  ParamVector mu;
  std::vector<double> lambda;
  Matrix q;
  std::size_t sample_count = 0;
};

// Rank budget used by measure_corr_pca. The sample-limited rule caps
// the budget at the number of samples so the ratio stays informative
// when few samples are available; the strict rule applies the ceil on
// the ambient dimension verbatim.
enum class PcaRankRule { kSampleLimited, kStrictPaper };

// u^T v / (|u||v|), or 0 when either vector is zero.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Fraction of squared singular-value mass in the first r values;
// 0 for an all-zero spectrum.
double conserved_energy_ratio(std::span<const double> sigma, std::size_t r);

// Conserved energy ratio at rank ceil(beta * min(p, q)).
double measure_corr_svd(const Matrix& phi, double beta);

// Smallest-rank truncated SVD whose conserved energy ratio reaches
// alpha. An all-zero matrix narrows to rank 0.
TruncatedSvd narrow_svd(const Matrix& phi, double alpha);

// Sample mean plus covariance eigendecomposition (divisor n-1).
// Uses the covariance route when p <= samples and the centered-Gram
// route when p > samples; both produce the same spectrum.
PcaFit pca_fit(const std::vector<ParamVector>& samples);

// (|mu|^2 + sum_{i<=r} lambda_i) / (|mu|^2 + sum_i lambda_i); 0 when
// both terms vanish.
double approx_energy_ratio(std::span<const double> mu,
                           std::span<const double> lambda, std::size_t r);

double measure_corr_pca(const std::vector<ParamVector>& samples, double beta,
                        PcaRankRule rule = PcaRankRule::kSampleLimited);
double measure_corr_pca(const PcaFit& fit, double beta,
                        PcaRankRule rule = PcaRankRule::kSampleLimited);

// Smallest r with approx_energy_ratio >= alpha; r = 0 allowed.
PcaBasis narrow_pca(const std::vector<ParamVector>& samples, double alpha);
PcaBasis narrow_pca(const PcaFit& fit, double alpha);

struct CorrelationReading {
  enum class Kind { kStructural, kTemporal, kSpatial };
  Kind kind = Kind::kStructural;
  double alpha = 0.0;
  std::size_t r_used = 0;
  std::size_t sample_count = 0;
  std::size_t round = 0;
  std::string layer;  // optional scope tag; empty means whole model

  // One JSONL record: {"round":..,"kind":..,"alpha":..,...}
  std::string to_jsonl() const;
};

const char* kind_name(CorrelationReading::Kind k);

}  // namespace fedcorr
