#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the dense linear algebra and the
// simulator. Every kernel has a scalar reference implementation and,
// where the host supports it, an AVX2 (x86-64) or NEON (aarch64)
// variant selected once at startup. The selected variant is used for
// the whole process so repeated runs on the same machine are
// reproducible bit for bit.

namespace fedcorr::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

// Backend currently routed to by the dispatch table.
Backend active_backend();
std::string_view backend_name();

// Forces a specific backend (tests, benchmarks). Throws InvalidInput if
// the requested backend is not available on this machine.
void force_backend(Backend backend);

// Picks the best backend the CPU supports. Called implicitly on first use.
void autodetect_backend();

// sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);
// sum_i x[i]*x[i]
double sum_sq(const double* x, std::size_t n);
// sum_i x[i]
double sum(const double* x, std::size_t n);
// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// x[i] *= a
void scal(double a, double* x, std::size_t n);
// Plane rotation: (x[i], y[i]) <- (c*x[i] + s*y[i], c*y[i] - s*x[i])
void rot(double* x, double* y, double c, double s, std::size_t n);

// Scalar reference implementations, always available. The dispatched
// kernels above are equivalence-tested against these.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sum_sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
}  // namespace scalar

}  // namespace fedcorr::kernels
