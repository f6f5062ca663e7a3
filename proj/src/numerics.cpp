#include "fedcorr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"

namespace fedcorr {

namespace {

constexpr double kJacobiTol = 1e-14;
constexpr int kMaxSweeps = 64;
constexpr double kSignTol = 1e-12;

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Index of the first entry of column j with magnitude above kSignTol,
// or rows() if the column is numerically zero.
std::size_t first_significant(const Matrix& m, std::size_t j) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (std::abs(m(i, j)) > kSignTol) return i;
  }
  return m.rows();
}

// One-sided Jacobi on the columns of a (rows >= cols assumed by the
// caller). Works on w = a^T so that columns become contiguous rows.
// Returns u (rows x cols), sigma (cols), v (cols x cols), unsorted.
void one_sided_jacobi(const Matrix& a, Matrix& u, std::vector<double>& sigma,
                      Matrix& v) {
  const std::size_t p = a.rows();
  const std::size_t q = a.cols();
  Matrix w = a.transposed();   // row i of w = column i of a
  Matrix vt = Matrix::identity(q);  // row i of vt = i-th column of v

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        const double aa = kernels::sum_sq(w.row(i), p);
        const double bb = kernels::sum_sq(w.row(j), p);
        const double cc = kernels::dot(w.row(i), w.row(j), p);
        if (aa == 0.0 || bb == 0.0) continue;
        if (std::abs(cc) <= kJacobiTol * std::sqrt(aa * bb)) continue;
        const double zeta = (bb - aa) / (2.0 * cc);
        const double t = sign_of(zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double cs = 1.0 / std::hypot(1.0, t);
        const double sn = cs * t;
        // col_i <- cs*col_i - sn*col_j ; col_j <- sn*col_i + cs*col_j
        kernels::rot(w.row(j), w.row(i), cs, sn, p);
        kernels::rot(vt.row(j), vt.row(i), cs, sn, q);
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  sigma.assign(q, 0.0);
  for (std::size_t i = 0; i < q; ++i)
    sigma[i] = std::sqrt(kernels::sum_sq(w.row(i), p));

  u = Matrix(p, q);
  std::vector<std::size_t> pending_zero;
  for (std::size_t i = 0; i < q; ++i) {
    if (sigma[i] > 0.0) {
      const double inv = 1.0 / sigma[i];
      for (std::size_t r = 0; r < p; ++r) u(r, i) = w(i, r) * inv;
    } else {
      pending_zero.push_back(i);
    }
  }

  // Complete zero-sigma columns to an orthonormal set: take the first
  // standard basis vector whose residual against the built columns is
  // non-negligible (one always exists; max residual norm >= 1/sqrt(p)).
  for (std::size_t zi : pending_zero) {
    ParamVector cand(p, 0.0);
    for (std::size_t e = 0; e < p; ++e) {
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < q; ++c) {
          if (c != zi && !(sigma[c] == 0.0 && c > zi)) {
            // project out every already-valid column
            double proj = 0.0;
            for (std::size_t r = 0; r < p; ++r) proj += u(r, c) * cand[r];
            for (std::size_t r = 0; r < p; ++r) cand[r] -= proj * u(r, c);
          }
        }
      }
      const double nrm = norm(cand);
      if (nrm > 1e-3) {
        for (std::size_t r = 0; r < p; ++r) u(r, zi) = cand[r] / nrm;
        break;
      }
    }
  }

  v = vt.transposed();
}

void apply_sign_convention(SvdResult& res) {
  for (std::size_t j = 0; j < res.u.cols(); ++j) {
    const std::size_t lead = first_significant(res.u, j);
    if (lead < res.u.rows() && res.u(lead, j) < 0.0) {
      res.u.negate_col(j);
      if (res.sigma[j] > 0.0) {
        res.v.negate_col(j);
      }
    }
    if (res.sigma[j] == 0.0) {
      // Zero singular value: u and v are paired only formally, so each
      // gets its own deterministic orientation.
      const std::size_t vlead = first_significant(res.v, j);
      if (vlead < res.v.rows() && res.v(vlead, j) < 0.0) res.v.negate_col(j);
    }
  }
}

}  // namespace

SvdResult thin_svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw InvalidInput("thin_svd: empty matrix");
  if (!a.all_finite()) throw InvalidInput("thin_svd: non-finite input");

  SvdResult res;
  if (a.rows() >= a.cols()) {
    one_sided_jacobi(a, res.u, res.sigma, res.v);
  } else {
    Matrix u, v;
    std::vector<double> sigma;
    one_sided_jacobi(a.transposed(), u, sigma, v);
    res.u = std::move(v);
    res.v = std::move(u);
    res.sigma = std::move(sigma);
  }

  // Stable sort by descending sigma; ties keep factorization order.
  const std::size_t k = res.sigma.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return res.sigma[x] > res.sigma[y];
  });

  SvdResult sorted;
  sorted.u = Matrix(res.u.rows(), k);
  sorted.v = Matrix(res.v.rows(), k);
  sorted.sigma.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    sorted.sigma[j] = res.sigma[order[j]];
    for (std::size_t i = 0; i < res.u.rows(); ++i)
      sorted.u(i, j) = res.u(i, order[j]);
    for (std::size_t i = 0; i < res.v.rows(); ++i)
      sorted.v(i, j) = res.v(i, order[j]);
  }

  apply_sign_convention(sorted);
  return sorted;
}

EigResult sym_eig_desc(const Matrix& c) {
  if (c.rows() != c.cols()) throw InvalidInput("sym_eig_desc: not square");
  if (c.rows() == 0) throw InvalidInput("sym_eig_desc: empty matrix");
  if (!c.all_finite()) throw InvalidInput("sym_eig_desc: non-finite input");

  const std::size_t p = c.rows();
  Matrix a(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) a(i, j) = 0.5 * (c(i, j) + c(j, i));
  }
  Matrix q = Matrix::identity(p);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        const double apq = a(i, j);
        const double scale =
            std::sqrt(a(i, i) * a(i, i) + a(j, j) * a(j, j));
        if (std::abs(apq) <= kJacobiTol * scale || apq == 0.0) continue;
        const double tau = (a(j, j) - a(i, i)) / (2.0 * apq);
        const double t = sign_of(tau) / (std::abs(tau) + std::hypot(1.0, tau));
        const double cs = 1.0 / std::hypot(1.0, t);
        const double sn = cs * t;
        // a <- J^T a J with J the (i,j) plane rotation.
        kernels::rot(a.row(j), a.row(i), cs, sn, p);
        for (std::size_t r = 0; r < p; ++r) {
          const double ari = a(r, i);
          const double arj = a(r, j);
          a(r, i) = cs * ari - sn * arj;
          a(r, j) = sn * ari + cs * arj;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
          const double qri = q(r, i);
          const double qrj = q(r, j);
          q(r, i) = cs * qri - sn * qrj;
          q(r, j) = sn * qri + cs * qrj;
        }
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  std::vector<double> lambda(p);
  for (std::size_t i = 0; i < p; ++i) lambda[i] = a(i, i);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return lambda[x] > lambda[y];
  });

  EigResult res;
  res.q = Matrix(p, p);
  res.lambda.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    res.lambda[j] = lambda[order[j]];
    for (std::size_t i = 0; i < p; ++i) res.q(i, j) = q(i, order[j]);
  }

  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t lead = first_significant(res.q, j);
    if (lead < p && res.q(lead, j) < 0.0) res.q.negate_col(j);
  }
  return res;
}

std::vector<double> lstsq_minnorm(const Matrix& m, std::span<const double> g) {
  if (m.rows() != g.size()) throw ShapeMismatch("lstsq_minnorm: dims differ");
  if (m.cols() == 0) return {};

  const SvdResult svd = thin_svd(m);
  const double cutoff = svd.sigma.empty() ? 0.0 : 1e-12 * svd.sigma.front();
  std::vector<double> coeffs(m.cols(), 0.0);
  for (std::size_t i = 0; i < svd.sigma.size(); ++i) {
    if (svd.sigma[i] <= cutoff || svd.sigma[i] == 0.0) continue;
    double ug = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) ug += svd.u(r, i) * g[r];
    const double w = ug / svd.sigma[i];
    for (std::size_t r = 0; r < m.cols(); ++r) coeffs[r] += w * svd.v(r, i);
  }
  return coeffs;
}

}  // namespace fedcorr
