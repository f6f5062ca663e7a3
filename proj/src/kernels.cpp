#include "fedcorr/kernels.hpp"

#include <atomic>

#include "fedcorr/error.hpp"

namespace fedcorr::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_sq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void rot(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = c * yi - s * xi;
  }
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define FEDCORR_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sum_sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define FEDCORR_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
double sum_sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace neon
#endif

namespace {

struct DispatchTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
  Backend backend;
};

constexpr DispatchTable kScalarTable{scalar::dot, scalar::sum_sq, scalar::sum,
                                     scalar::axpy, scalar::scal, scalar::rot,
                                     Backend::kScalar};

#ifdef FEDCORR_HAVE_AVX2_KERNELS
constexpr DispatchTable kAvx2Table{avx2::dot, avx2::sum_sq, avx2::sum,
                                   avx2::axpy, avx2::scal, avx2::rot,
                                   Backend::kAvx2};
#endif

#ifdef FEDCORR_HAVE_NEON_KERNELS
constexpr DispatchTable kNeonTable{neon::dot, neon::sum_sq, neon::sum,
                                   neon::axpy, neon::scal, neon::rot,
                                   Backend::kNeon};
#endif

bool avx2_supported() {
#ifdef FEDCORR_HAVE_AVX2_KERNELS
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool neon_supported() {
#ifdef FEDCORR_HAVE_NEON_KERNELS
  return true;  // NEON is architecturally guaranteed on aarch64.
#else
  return false;
#endif
}

const DispatchTable* detect_best() {
#ifdef FEDCORR_HAVE_AVX2_KERNELS
  if (avx2_supported()) return &kAvx2Table;
#endif
#ifdef FEDCORR_HAVE_NEON_KERNELS
  if (neon_supported()) return &kNeonTable;
#endif
  return &kScalarTable;
}

std::atomic<const DispatchTable*> g_table{nullptr};

const DispatchTable& table() {
  const DispatchTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = detect_best();
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

Backend active_backend() { return table().backend; }

std::string_view backend_name() {
  switch (table().backend) {
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
    case Backend::kScalar:
    default:
      return "scalar";
  }
}

void force_backend(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      g_table.store(&kScalarTable, std::memory_order_release);
      return;
    case Backend::kAvx2:
#ifdef FEDCORR_HAVE_AVX2_KERNELS
      if (avx2_supported()) {
        g_table.store(&kAvx2Table, std::memory_order_release);
        return;
      }
#endif
      throw InvalidInput("avx2 kernels not available on this machine");
    case Backend::kNeon:
#ifdef FEDCORR_HAVE_NEON_KERNELS
      if (neon_supported()) {
        g_table.store(&kNeonTable, std::memory_order_release);
        return;
      }
#endif
      throw InvalidInput("neon kernels not available on this machine");
  }
  throw InvalidInput("unknown kernel backend");
}

void autodetect_backend() {
  g_table.store(detect_best(), std::memory_order_release);
}

double dot(const double* x, const double* y, std::size_t n) {
  return table().dot(x, y, n);
}

double sum_sq(const double* x, std::size_t n) { return table().sum_sq(x, n); }

double sum(const double* x, std::size_t n) { return table().sum(x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  table().axpy(a, x, y, n);
}

void scal(double a, double* x, std::size_t n) { table().scal(a, x, n); }

void rot(double* x, double* y, double c, double s, std::size_t n) {
  table().rot(x, y, c, s, n);
}

}  // namespace fedcorr::kernels
