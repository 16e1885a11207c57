#include "nclab/kernels.hpp"

#include <algorithm>

#include "nclab/errors.hpp"

namespace nclab::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sumsq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void rot(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -s * xi + c * yi;
  }
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c) {
  std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = a[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

}  // namespace scalar

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
  void (*gemm)(std::size_t, std::size_t, std::size_t, const double*,
               const double*, double*);
};

constexpr Dispatch scalar_table{scalar::dot, scalar::sumsq, scalar::axpy,
                                scalar::scale, scalar::rot, scalar::gemm};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Dispatch avx2_table{avx2::dot, avx2::sumsq, avx2::axpy,
                              avx2::scale, avx2::rot, avx2::gemm};

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool cpu_has_avx2() { return false; }
#endif

Backend detect_backend() { return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar; }

Backend g_backend = detect_backend();

const Dispatch& table() {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_backend == Backend::Avx2) return avx2_table;
#endif
  return scalar_table;
}

}  // namespace

Backend active_backend() { return g_backend; }

bool backend_supported(Backend b) {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
  if (!backend_supported(b))
    throw InvalidInputError("kernel backend not supported on this machine: " +
                            std::string(backend_name(b)));
  g_backend = b;
}

void reset_backend() { g_backend = detect_backend(); }

double dot(const double* x, const double* y, std::size_t n) {
  return table().dot(x, y, n);
}
double sumsq(const double* x, std::size_t n) { return table().sumsq(x, n); }
void axpy(double a, const double* x, double* y, std::size_t n) {
  table().axpy(a, x, y, n);
}
void scale(double a, double* x, std::size_t n) { table().scale(a, x, n); }
void rot(double* x, double* y, double c, double s, std::size_t n) {
  table().rot(x, y, c, s, n);
}
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c) {
  table().gemm(m, k, n, a, b, c);
}

}  // namespace nclab::kernels
