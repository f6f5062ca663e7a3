#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"
#include "fedcorr/numerics.hpp"
#include "testutil.hpp"

using namespace fedcorr;
using namespace fedcorr::testutil;

namespace {

Matrix make(std::size_t rows, std::size_t cols,
            std::initializer_list<double> entries) {
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (double e : entries) {
    m(k / cols, k % cols) = e;
    ++k;
  }
  return m;
}

}  // namespace

TEST_CASE("thin_svd on pinned small cases") {
  SUBCASE("identity") {
    const SvdResult svd = thin_svd(Matrix::identity(2));
    CHECK(svd.sigma[0] == doctest::Approx(1.0));
    CHECK(svd.sigma[1] == doctest::Approx(1.0));
  }
  SUBCASE("diagonal, needs reordering") {
    const SvdResult svd = thin_svd(make(2, 2, {3, 0, 0, 4}));
    CHECK(svd.sigma[0] == doctest::Approx(4.0));
    CHECK(svd.sigma[1] == doctest::Approx(3.0));
  }
  SUBCASE("rank one") {
    const SvdResult svd = thin_svd(make(2, 2, {1, 1, 1, 1}));
    CHECK(svd.sigma[0] == doctest::Approx(2.0));
    CHECK(svd.sigma[1] == doctest::Approx(0.0).epsilon(0).scale(1e-12));
    CHECK(max_abs_offdiag_gram(svd.u) < 1e-10);
    CHECK(max_abs_offdiag_gram(svd.v) < 1e-10);
  }
}

TEST_CASE("thin_svd determinism and conventions on random matrices") {
  Rng rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform_index(12));
    const std::size_t q = 1 + static_cast<std::size_t>(rng.uniform_index(12));
    const Matrix a = random_matrix(rng, p, q);
    const SvdResult svd = thin_svd(a);

    CHECK(svd.sigma.size() == std::min(p, q));
    for (std::size_t i = 0; i + 1 < svd.sigma.size(); ++i)
      CHECK(svd.sigma[i] >= svd.sigma[i + 1]);
    CHECK(max_abs_offdiag_gram(svd.u) < 1e-10);
    CHECK(max_abs_offdiag_gram(svd.v) < 1e-10);

    const double err = frobenius_dist(reconstruct(svd), a);
    CHECK(err <= 1e-8 * frobenius_norm(a));

    // Sign convention: the first significant entry of each u-column is
    // non-negative.
    for (std::size_t j = 0; j < svd.u.cols(); ++j) {
      for (std::size_t i = 0; i < svd.u.rows(); ++i) {
        if (std::abs(svd.u(i, j)) > 1e-12) {
          CHECK(svd.u(i, j) > 0.0);
          break;
        }
      }
    }

    // Determinism: the same input factors identically.
    const SvdResult again = thin_svd(a);
    CHECK(again.u == svd.u);
    CHECK(again.v == svd.v);
    CHECK(again.sigma == svd.sigma);
  }
}

TEST_CASE("thin_svd rejects bad input") {
  Matrix bad(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(thin_svd(bad), InvalidInput);
  CHECK_THROWS_AS(thin_svd(Matrix()), InvalidInput);
}

TEST_CASE("Eckart-Young: the truncated SVD beats random rank-r bases") {
  Rng rng(47);
  const Matrix a = random_matrix(rng, 12, 9);
  const SvdResult svd = thin_svd(a);
  for (std::size_t r : {1u, 3u, 5u}) {
    const Matrix u_r = svd.u.left_cols(r);
    const Matrix best = matmul(u_r, matmul(u_r.transposed(), a));
    const double best_err = frobenius_dist(a, best);
    for (int trial = 0; trial < 100; ++trial) {
      const Matrix b = random_orthonormal(rng, 12, r);
      const Matrix proj = matmul(b, matmul(b.transposed(), a));
      CHECK(frobenius_dist(a, proj) >= best_err - 1e-10);
    }
  }
}

TEST_CASE("sym_eig_desc pinned cases") {
  SUBCASE("diagonal") {
    const EigResult eig = sym_eig_desc(make(2, 2, {2, 0, 0, 5}));
    CHECK(eig.lambda[0] == doctest::Approx(5.0));
    CHECK(eig.lambda[1] == doctest::Approx(2.0));
  }
  SUBCASE("zero matrix") {
    const EigResult eig = sym_eig_desc(Matrix(3, 3));
    for (double l : eig.lambda) CHECK(l == 0.0);
  }
  SUBCASE("identity") {
    const EigResult eig = sym_eig_desc(Matrix::identity(4));
    for (double l : eig.lambda) CHECK(l == doctest::Approx(1.0));
  }
  SUBCASE("non-square input") {
    CHECK_THROWS_AS(sym_eig_desc(Matrix(2, 3)), InvalidInput);
  }
  SUBCASE("indefinite") {
    const EigResult eig = sym_eig_desc(make(2, 2, {0, 1, 1, 0}));
    CHECK(eig.lambda[0] == doctest::Approx(1.0));
    CHECK(eig.lambda[1] == doctest::Approx(-1.0));
  }
}

TEST_CASE("sym_eig_desc reconstructs random symmetric matrices") {
  Rng rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t p = 2 + static_cast<std::size_t>(rng.uniform_index(10));
    Matrix c(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i; j < p; ++j) {
        c(i, j) = rng.normal();
        c(j, i) = c(i, j);
      }
    }
    const EigResult eig = sym_eig_desc(c);
    CHECK(max_abs_offdiag_gram(eig.q) < 1e-10);

    Matrix scaled = eig.q;
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i < p; ++i) scaled(i, j) *= eig.lambda[j];
    const Matrix rebuilt = matmul(scaled, eig.q.transposed());
    CHECK(frobenius_dist(rebuilt, c) <= 1e-8 * (1.0 + frobenius_norm(c)));
    for (std::size_t i = 0; i + 1 < p; ++i)
      CHECK(eig.lambda[i] >= eig.lambda[i + 1]);
  }
}

TEST_CASE("lstsq_minnorm pinned cases") {
  SUBCASE("orthonormal columns pick out inner products") {
    const Matrix m = make(3, 2, {1, 0, 0, 1, 0, 0});
    const ParamVector g{2, 3, 5};
    const auto a = lstsq_minnorm(m, g);
    CHECK(a[0] == doctest::Approx(2.0));
    CHECK(a[1] == doctest::Approx(3.0));
  }
  SUBCASE("zero operator has the zero minimum-norm solution") {
    const Matrix m(3, 2);
    const auto a = lstsq_minnorm(m, ParamVector{1, 2, 3});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
  }
  SUBCASE("single column") {
    const Matrix m = make(2, 1, {1, 1});
    const auto a = lstsq_minnorm(m, ParamVector{2, 0});
    CHECK(a[0] == doctest::Approx(1.0));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(lstsq_minnorm(Matrix(3, 2), ParamVector{1, 2}),
                    ShapeMismatch);
  }
}

TEST_CASE("lstsq residual is orthogonal to the column space") {
  Rng rng(59);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t d = 4 + static_cast<std::size_t>(rng.uniform_index(10));
    const std::size_t h = 1 + static_cast<std::size_t>(rng.uniform_index(5));
    Matrix m = random_matrix(rng, d, h);
    if (rep % 3 == 0 && h >= 2) {
      // Exercise the rank-deficient path: duplicate a column.
      for (std::size_t i = 0; i < d; ++i) m(i, h - 1) = m(i, 0);
    }
    const ParamVector g = random_vector(rng, d);
    const auto a = lstsq_minnorm(m, g);

    ParamVector residual = g;
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t i = 0; i < d; ++i) residual[i] -= a[j] * m(i, j);
    for (std::size_t j = 0; j < h; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += residual[i] * m(i, j);
      CHECK(std::abs(dot) < 1e-8);
    }
  }
}

TEST_CASE("PCA/SVD equivalence: centered singular values give covariance eigenvalues") {
  Rng rng(61);
  const std::size_t p = 6;
  const std::size_t n = 9;
  std::vector<ParamVector> samples;
  for (std::size_t t = 0; t < n; ++t) samples.push_back(random_vector(rng, p));

  ParamVector mu(p, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < p; ++i) mu[i] += s[i] / static_cast<double>(n);

  Matrix centered(p, n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < p; ++i) centered(i, t) = samples[t][i] - mu[i];

  Matrix cov(p, p);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        cov(i, j) += centered(i, t) * centered(j, t) / static_cast<double>(n - 1);
  }

  const SvdResult svd = thin_svd(centered);
  const EigResult eig = sym_eig_desc(cov);
  for (std::size_t i = 0; i < p; ++i) {
    const double from_svd =
        svd.sigma[i] * svd.sigma[i] / static_cast<double>(n - 1);
    CHECK(from_svd == doctest::Approx(eig.lambda[i]).epsilon(1e-8));
  }
}
