#include "fedcorr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"
#include "fedcorr/numerics.hpp"

namespace fedcorr {

namespace {

void check_fraction(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

// ceil(beta * n) with a guard against products like 0.2*20 landing a few
// ulps above the intended integer.
std::size_t ceil_fraction(double beta, std::size_t n) {
  const double x = std::ceil(beta * static_cast<double>(n) - 1e-9);
  return x <= 0.0 ? 0 : static_cast<std::size_t>(x);
}

std::size_t check_samples(const std::vector<ParamVector>& samples) {
  if (samples.size() < 2)
    throw InsufficientSamples("pca: need at least 2 samples");
  const std::size_t p = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != p) throw ShapeMismatch("pca: samples differ in length");
  }
  if (p == 0) throw InvalidInput("pca: zero-dimensional samples");
  return p;
}

ParamVector sample_mean(const std::vector<ParamVector>& samples,
                        std::size_t p) {
  ParamVector mu(p, 0.0);
  for (const auto& s : samples) kernels::axpy(1.0, s.data(), mu.data(), p);
  kernels::scal(1.0 / static_cast<double>(samples.size()), mu.data(), p);
  return mu;
}

// Sample covariance spectrum. Eigendecomposes the p x p covariance when
// p <= n, or the n x n centered Gram when the samples are tall; the
// Gram eigenvalues over (n-1) are the covariance eigenvalues, and its
// eigenvectors materialize principal directions on demand. Eigenvalues
// are clamped at zero to shed rounding noise.
struct CovSpectrum {
  ParamVector mu;
  std::vector<double> lambda;  // min(p, n) values, non-increasing
  bool gram_route = false;
  EigResult eig;  // covariance eig (p x p) or centered-Gram eig (n x n)
};

CovSpectrum covariance_spectrum(const std::vector<ParamVector>& samples) {
  const std::size_t p = check_samples(samples);
  const std::size_t n = samples.size();
  const double divisor = static_cast<double>(n - 1);

  CovSpectrum out;
  out.mu = sample_mean(samples, p);

  if (p <= n) {
    Matrix cov(p, p);
    ParamVector centered(p);
    for (const auto& s : samples) {
      for (std::size_t i = 0; i < p; ++i) centered[i] = s[i] - out.mu[i];
      for (std::size_t i = 0; i < p; ++i) {
        if (centered[i] != 0.0)
          kernels::axpy(centered[i], centered.data(), cov.row(i), p);
      }
    }
    kernels::scal(1.0 / divisor, cov.data(), cov.size());
    out.eig = sym_eig_desc(cov);
    out.lambda = out.eig.lambda;
  } else {
    Matrix centered(n, p);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < p; ++i)
        centered(t, i) = samples[t][i] - out.mu[i];
    }
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = kernels::dot(centered.row(i), centered.row(j), p);
        gram(i, j) = v;
        gram(j, i) = v;
      }
    }
    out.gram_route = true;
    out.eig = sym_eig_desc(gram);
    for (double& g : out.eig.lambda) g = std::max(0.0, g);
    out.lambda.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.lambda[i] = out.eig.lambda[i] / divisor;
  }
  for (double& l : out.lambda) l = std::max(0.0, l);
  return out;
}

double aer_from_spectrum(std::span<const double> mu,
                         std::span<const double> lambda, std::size_t r) {
  const double mu_energy = kernels::sum_sq(mu.data(), mu.size());
  double kept = mu_energy;
  double total = mu_energy;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    total += lambda[i];
    if (i < r) kept += lambda[i];
  }
  if (total == 0.0) return 0.0;
  if (r >= lambda.size()) return 1.0;
  return kept / total;
}

std::size_t smallest_rank_for(std::span<const double> mu,
                              std::span<const double> lambda, double alpha) {
  for (std::size_t r = 0; r <= lambda.size(); ++r) {
    if (aer_from_spectrum(mu, lambda, r) >= alpha) return r;
  }
  // All-zero spectrum with zero mean: nothing to represent.
  return 0;
}

// Principal directions 0..r-1 from a Gram-route spectrum:
// q_j = sum_t w_j[t] (x_t - mu) / sqrt(gamma_j).
Matrix gram_basis_columns(const std::vector<ParamVector>& samples,
                          const CovSpectrum& spec, std::size_t r) {
  const std::size_t p = spec.mu.size();
  const std::size_t n = samples.size();
  Matrix q(p, r);
  ParamVector accum(p);
  for (std::size_t j = 0; j < r; ++j) {
    std::fill(accum.begin(), accum.end(), 0.0);
    double wsum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double w = spec.eig.q(t, j);
      wsum += w;
      if (w != 0.0) kernels::axpy(w, samples[t].data(), accum.data(), p);
    }
    kernels::axpy(-wsum, spec.mu.data(), accum.data(), p);
    const double gamma = spec.eig.lambda[j];
    const double inv = gamma > 0.0 ? 1.0 / std::sqrt(gamma) : 0.0;
    for (std::size_t i = 0; i < p; ++i) q(i, j) = accum[i] * inv;
  }
  // Orientation rule shared with the factorizations: first significant
  // entry of each column non-negative.
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < p; ++i) {
      if (std::abs(q(i, j)) > 1e-12) {
        if (q(i, j) < 0.0) q.negate_col(j);
        break;
      }
    }
  }
  return q;
}

}  // namespace

double cosine_similarity(std::span<const double> u,
                         std::span<const double> v) {
  if (u.size() != v.size())
    throw ShapeMismatch("cosine_similarity: length mismatch");
  const double nu = kernels::sum_sq(u.data(), u.size());
  const double nv = kernels::sum_sq(v.data(), v.size());
  if (nu == 0.0 || nv == 0.0) return 0.0;
  const double c = kernels::dot(u.data(), v.data(), u.size()) /
                   (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

double conserved_energy_ratio(std::span<const double> sigma, std::size_t r) {
  if (r > sigma.size())
    throw InvalidInput("conserved_energy_ratio: r out of range");
  double kept = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double sq = sigma[i] * sigma[i];
    total += sq;
    if (i < r) kept += sq;
  }
  if (total == 0.0) return 0.0;
  if (r == sigma.size()) return 1.0;
  return kept / total;
}

double measure_corr_svd(const Matrix& phi, double beta) {
  check_fraction(beta, "beta");
  if (phi.rows() == 0 || phi.cols() == 0)
    throw InvalidInput("measure_corr_svd: empty matrix");
  if (!phi.all_finite())
    throw InvalidInput("measure_corr_svd: non-finite input");

  // Only squared singular values are needed, which the Gram
  // eigendecomposition of the smaller side yields directly.
  const std::size_t k = std::min(phi.rows(), phi.cols());
  const Matrix side = phi.rows() >= phi.cols() ? phi.transposed() : phi;
  Matrix gram(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double v = kernels::dot(side.row(i), side.row(j), side.cols());
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  EigResult eig = sym_eig_desc(gram);

  const std::size_t r = std::min(ceil_fraction(beta, k), k);
  double kept = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double g = std::max(0.0, eig.lambda[i]);
    total += g;
    if (i < r) kept += g;
  }
  if (total == 0.0) return 0.0;
  if (r >= k) return 1.0;
  return kept / total;
}

TruncatedSvd narrow_svd(const Matrix& phi, double alpha) {
  check_fraction(alpha, "alpha");
  const SvdResult svd = thin_svd(phi);
  const std::size_t k = svd.sigma.size();

  double total = 0.0;
  for (double s : svd.sigma) total += s * s;

  std::size_t r = 0;
  if (total > 0.0) {
    double kept = 0.0;
    while (r < k) {
      if (kept / total >= alpha) break;
      kept += svd.sigma[r] * svd.sigma[r];
      ++r;
    }
    // Loop falling through to r == k is the full decomposition, which
    // conserves everything by definition.
  }

  TruncatedSvd out;
  out.rank = r;
  out.u_r = svd.u.left_cols(r);
  out.v_r = svd.v.left_cols(r);
  out.sigma_r.assign(svd.sigma.begin(),
                     svd.sigma.begin() + static_cast<std::ptrdiff_t>(r));
  return out;
}

PcaFit pca_fit(const std::vector<ParamVector>& samples) {
  const std::size_t p = check_samples(samples);
  const std::size_t n = samples.size();

  PcaFit fit;
  fit.sample_count = n;

  if (p <= n) {
    CovSpectrum spec = covariance_spectrum(samples);
    fit.mu = std::move(spec.mu);
    fit.lambda = std::move(spec.lambda);
    fit.q = std::move(spec.eig.q);
  } else {
    // Tall sample matrix: thin SVD of the centered columns. Squared
    // singular values over (n-1) are the covariance eigenvalues and
    // the left singular vectors the principal directions.
    fit.mu = sample_mean(samples, p);
    Matrix centered(p, n);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < p; ++i)
        centered(i, t) = samples[t][i] - fit.mu[i];
    }
    SvdResult svd = thin_svd(centered);
    fit.lambda.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      fit.lambda[i] = std::max(
          0.0, svd.sigma[i] * svd.sigma[i] / static_cast<double>(n - 1));
    }
    fit.q = std::move(svd.u);
  }
  return fit;
}

double approx_energy_ratio(std::span<const double> mu,
                           std::span<const double> lambda, std::size_t r) {
  if (r > lambda.size())
    throw InvalidInput("approx_energy_ratio: r out of range");
  return aer_from_spectrum(mu, lambda, r);
}

double measure_corr_pca(const std::vector<ParamVector>& samples, double beta,
                        PcaRankRule rule) {
  check_fraction(beta, "beta");
  const std::size_t p = check_samples(samples);
  const CovSpectrum spec = covariance_spectrum(samples);
  std::size_t r = rule == PcaRankRule::kStrictPaper
                      ? ceil_fraction(beta, p)
                      : ceil_fraction(beta, std::min(p, samples.size()));
  // Ranks past the spectrum length only add structurally-zero
  // eigenvalues, so clamping is exact.
  r = std::min(r, spec.lambda.size());
  return aer_from_spectrum(spec.mu, spec.lambda, r);
}

double measure_corr_pca(const PcaFit& fit, double beta, PcaRankRule rule) {
  check_fraction(beta, "beta");
  const std::size_t p = fit.mu.size();
  std::size_t r = rule == PcaRankRule::kStrictPaper
                      ? ceil_fraction(beta, p)
                      : ceil_fraction(beta, std::min(p, fit.sample_count));
  r = std::min(r, fit.lambda.size());
  return aer_from_spectrum(fit.mu, fit.lambda, r);
}

PcaBasis narrow_pca(const std::vector<ParamVector>& samples, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidInput("alpha must lie in (0, 1]");
  const CovSpectrum spec = covariance_spectrum(samples);
  const std::size_t r = smallest_rank_for(spec.mu, spec.lambda, alpha);

  PcaBasis out;
  out.rank = r;
  out.mu = spec.mu;
  out.q_r = spec.gram_route ? gram_basis_columns(samples, spec, r)
                            : spec.eig.q.left_cols(r);
  return out;
}

PcaBasis narrow_pca(const PcaFit& fit, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidInput("alpha must lie in (0, 1]");
  const std::size_t r = smallest_rank_for(fit.mu, fit.lambda, alpha);
  PcaBasis out;
  out.rank = r;
  out.mu = fit.mu;
  out.q_r = fit.q.left_cols(r);
  return out;
}

const char* kind_name(CorrelationReading::Kind k) {
  switch (k) {
    case CorrelationReading::Kind::kStructural:
      return "structural";
    case CorrelationReading::Kind::kTemporal:
      return "temporal";
    case CorrelationReading::Kind::kSpatial:
      return "spatial";
  }
  return "?";
}

std::string CorrelationReading::to_jsonl() const {
  nlohmann::json j{{"round", round},
                   {"kind", kind_name(kind)},
                   {"alpha", alpha},
                   {"r_used", r_used},
                   {"sample_count", sample_count}};
  if (!layer.empty()) j["layer"] = layer;
  return j.dump();
}

}  // namespace fedcorr
