#include "nclab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nclab/errors.hpp"
#include "nclab/kernels.hpp"

namespace nclab::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw InvalidInputError("matrix shape mismatch in addition");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw InvalidInputError("matrix shape mismatch in subtraction");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
  return *this;
}

Matrix& Matrix::operator*=(double a) {
  kernels::scale(a, d_.data(), d_.size());
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw InvalidInputError("matrix shape mismatch in product: " +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()));
  Matrix c(a.rows(), b.cols());
  kernels::gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double trace(const Matrix& a) {
  double acc = 0.0;
  const std::size_t n = std::min(a.rows(), a.cols());
  for (std::size_t i = 0; i < n; ++i) acc += a(i, i);
  return acc;
}

double frobenius_norm(const Matrix& a) {
  return std::sqrt(kernels::sumsq(a.data(), a.size()));
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

double asymmetry(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - a(j, i)));
  return m;
}

Matrix symmetrize(const Matrix& a) {
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

SymEigen sym_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  if (n == 0 || input.cols() != n)
    throw InvalidInputError("sym_eigen requires a nonempty square matrix");
  if (n > 4096)
    throw CapacityError("sym_eigen dimension guard exceeded: " + std::to_string(n));
  const double scale = std::max(max_abs(input), 1.0);
  if (asymmetry(input) > 1e-12 * scale)
    throw InvalidInputError("sym_eigen requires a symmetric matrix");

  Matrix a = symmetrize(input);
  Matrix vt = Matrix::identity(n);

  auto offdiag_norm = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  const double fro = std::max(frobenius_norm(a), 1e-300);
  const double tol = 1e-15 * fro;
  const int max_sweeps = 64;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm() <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Rows first (contiguous, vectorized); columns then follow from
        // symmetry of the two-sided result, except for the 2x2 block.
        kernels::rot(a.row(p), a.row(q), c, -s, n);
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          a(i, p) = a(p, i);
          a(i, q) = a(q, i);
        }
        a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        kernels::rot(vt.row(p), vt.row(q), c, -s, n);
      }
    }
  }
  if (sweep == max_sweeps && offdiag_norm() > tol * 16)
    throw NumericalError("jacobi eigensolver did not converge in " +
                         std::to_string(max_sweeps) + " sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEigen out;
  out.values.resize(n);
  out.vectors_t = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    out.values[r] = a(src, src);
    const double* vrow = vt.row(src);
    // deterministic sign: largest-|.| component positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(vrow[i]) > std::abs(vrow[arg])) arg = i;
    const double flip = vrow[arg] < 0.0 ? -1.0 : 1.0;
    double* dst = out.vectors_t.row(r);
    for (std::size_t i = 0; i < n; ++i) dst[i] = flip * vrow[i];
  }
  return out;
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw InvalidInputError("gauss_hermite order must be >= 1");
  if (n > 256) throw CapacityError("gauss_hermite order guard exceeded");
  const double sqrt_pi = 1.7724538509055160272981674833411;
  // Jacobi matrix of the (monic, physicists') Hermite recurrence:
  // p_{k+1} = x p_k - (k/2) p_{k-1}; off-diagonals sqrt(k/2).
  Matrix j(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    j(k - 1, k) = b;
    j(k, k - 1) = b;
  }
  SymEigen e = sym_eigen(j);
  GaussHermiteRule rule;
  rule.nodes = e.values;
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = e.vectors_t(i, 0);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return rule;
}

}  // namespace nclab::linalg
