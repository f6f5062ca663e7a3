#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedcorr/kernels.hpp"
#include "fedcorr/rng.hpp"

using namespace fedcorr;

namespace {

// Sizes straddling the vector widths and their remainder paths.
const std::vector<std::size_t> kSizes{0, 1, 2, 3, 4, 5, 7, 8, 9,
                                      15, 16, 17, 31, 64, 257, 1000};

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * std::exp(rng.uniform(-3.0, 3.0));
  return v;
}

}  // namespace

TEST_CASE("dispatched kernels match the scalar reference") {
  Rng rng(7);
  const double c = 0.8;
  const double s = 0.6;
  for (std::size_t n : kSizes) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto x = random_vec(rng, n);
      const auto y = random_vec(rng, n);

      const double scale = std::sqrt(kernels::scalar::sum_sq(x.data(), n) *
                                     kernels::scalar::sum_sq(y.data(), n)) +
                           1.0;
      CHECK(std::abs(kernels::dot(x.data(), y.data(), n) -
                     kernels::scalar::dot(x.data(), y.data(), n)) <=
            1e-13 * scale);
      CHECK(std::abs(kernels::sum_sq(x.data(), n) -
                     kernels::scalar::sum_sq(x.data(), n)) <= 1e-13 * scale);
      CHECK(std::abs(kernels::sum(x.data(), n) -
                     kernels::scalar::sum(x.data(), n)) <= 1e-13 * scale);

      auto y1 = y;
      auto y2 = y;
      kernels::axpy(1.7, x.data(), y1.data(), n);
      kernels::scalar::axpy(1.7, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

      auto x1 = x;
      auto x2 = x;
      kernels::scal(-0.3, x1.data(), n);
      kernels::scalar::scal(-0.3, x2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(x1[i] == x2[i]);

      auto rx1 = x;
      auto ry1 = y;
      auto rx2 = x;
      auto ry2 = y;
      kernels::rot(rx1.data(), ry1.data(), c, s, n);
      kernels::scalar::rot(rx2.data(), ry2.data(), c, s, n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(rx1[i] == doctest::Approx(rx2[i]).epsilon(1e-13));
        CHECK(ry1[i] == doctest::Approx(ry2[i]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("rot preserves two-norm") {
  Rng rng(11);
  auto x = random_vec(rng, 129);
  auto y = random_vec(rng, 129);
  const double before =
      kernels::sum_sq(x.data(), x.size()) + kernels::sum_sq(y.data(), y.size());
  const double theta = 0.731;
  kernels::rot(x.data(), y.data(), std::cos(theta), std::sin(theta), x.size());
  const double after =
      kernels::sum_sq(x.data(), x.size()) + kernels::sum_sq(y.data(), y.size());
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("backend forcing") {
  const kernels::Backend original = kernels::active_backend();
  kernels::force_backend(kernels::Backend::kScalar);
  CHECK(kernels::active_backend() == kernels::Backend::kScalar);
  CHECK(kernels::backend_name() == "scalar");
  kernels::autodetect_backend();
  CHECK(kernels::active_backend() == original);
#if defined(__x86_64__)
  // The sandbox always has AVX2; elsewhere detection decides.
  if (original == kernels::Backend::kAvx2) {
    kernels::force_backend(kernels::Backend::kAvx2);
    CHECK(kernels::backend_name() == "avx2");
  }
#endif
  kernels::autodetect_backend();
}
