#pragma once

#include <cstddef>
#include <vector>

namespace sfo {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  static Matrix identity(std::size_t n);
};

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
double frobenius_norm(const Matrix& A);
double max_abs(const Matrix& A);

struct EigenResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns are eigenvectors
  double residual;             // ||A V - V diag|| _F / ||A||_F
};

// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvalues are returned
// in descending order; each eigenvector is sign-normalized so that its first
// component of largest magnitude is positive.
EigenResult sym_eigen(const Matrix& A, double tol = 1e-12);

// Householder QR, returning the thin Q factor. Throws on rank deficiency
// (pivot below 1e-12 relative).
Matrix qr_orthonormalize(const Matrix& A);

// LU with partial pivoting. Throws if a pivot falls below 1e-12 relative.
std::vector<double> solve_dense(Matrix A, std::vector<double> b);

}  // namespace sfo
