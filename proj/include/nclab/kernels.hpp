#pragma once

#include <cstddef>

// Dense inner-loop kernels. Every operation has a scalar reference
// implementation and, on x86-64 with AVX2+FMA, a vectorized variant. The
// backend is picked once at startup from CPUID and can be overridden (CLI
// --kernel, or set_backend in tests). Variants are equivalence-tested
// against the scalar reference; they may differ from it by reassociation
// rounding only.
namespace nclab::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
const char* backend_name(Backend b);
// Throws InvalidInputError if the backend is not supported on this machine.
void set_backend(Backend b);
// Back to the auto-detected default.
void reset_backend();

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);
// sum_i x[i]^2
double sumsq(const double* x, std::size_t n);
// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// x[i] *= a
void scale(double a, double* x, std::size_t n);
// Plane rotation: (x[i], y[i]) <- (c*x[i] + s*y[i], -s*x[i] + c*y[i])
void rot(double* x, double* y, double c, double s, std::size_t n);
// Row-major C(m x n) = A(m x k) * B(k x n); C is overwritten and must not
// alias A or B.
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c);

// Direct entry points for the equivalence tests.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void rot(double* x, double* y, double c, double s, std::size_t n);
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c);
}  // namespace avx2
#endif

}  // namespace nclab::kernels
