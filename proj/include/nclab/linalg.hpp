#pragma once

#include <cstddef>
#include <vector>

namespace nclab::linalg {

// Dense row-major matrix of doubles. Value semantics; heavy products go
// through the kernels module.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  double* row(std::size_t i) { return d_.data() + i * cols_; }
  const double* row(std::size_t i) const { return d_.data() + i * cols_; }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double a);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double a, Matrix m) { return m *= a; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
// Largest |a_ij - a_ji|; 0 for an exactly symmetric matrix.
double asymmetry(const Matrix& a);
// (a + a^T) / 2; makes symmetry exact after a spectral reassembly.
Matrix symmetrize(const Matrix& a);

// Eigendecomposition of a real symmetric matrix. vectors_t stores the
// eigenvectors as ROWS (row r pairs with values[r]); values ascend. Each
// eigenvector's largest-magnitude component is made positive so repeated
// runs agree bit for bit.
struct SymEigen {
  std::vector<double> values;
  Matrix vectors_t;
};

// Cyclic Jacobi with two-row rotations. Dimension guard 4096. Throws
// InvalidInputError for non-square or non-symmetric input, NumericalError
// if sweeps fail to converge (does not happen for finite symmetric input).
SymEigen sym_eigen(const Matrix& a);

// Nodes/weights for integrating f against exp(-x^2) on the real line:
// integral f(x) e^{-x^2} dx ~ sum_i weights[i] * f(nodes[i]).
// Golub-Welsch on the Hermite Jacobi matrix; exact for f of degree < 2n.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

}  // namespace nclab::linalg
