#include "sfo/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sfo {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* brow = &B.a[k * B.cols];
      double* crow = &C.a[i * C.cols];
      for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

double frobenius_norm(const Matrix& A) {
  double s = 0.0;
  for (double x : A.a) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Matrix& A) {
  double m = 0.0;
  for (double x : A.a) m = std::max(m, std::abs(x));
  return m;
}

namespace {

void check_symmetric(const Matrix& A, double tol) {
  if (A.rows != A.cols)
    throw std::invalid_argument("sym_eigen: matrix is not square");
  const double scale = std::max(max_abs(A), 1.0);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = i + 1; j < A.cols; ++j)
      if (std::abs(A(i, j) - A(j, i)) > tol * scale)
        throw std::invalid_argument("sym_eigen: matrix is not symmetric");
}

double off_diagonal_norm(const Matrix& A) {
  double s = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j)
      if (i != j) s += A(i, j) * A(i, j);
  return std::sqrt(s);
}

// Deterministic sign rule: first component of largest magnitude positive.
void normalize_column_sign(Matrix& V, std::size_t col) {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t i = 0; i < V.rows; ++i) {
    const double m = std::abs(V(i, col));
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  if (V(best, col) < 0.0)
    for (std::size_t i = 0; i < V.rows; ++i) V(i, col) = -V(i, col);
}

}  // namespace

EigenResult sym_eigen(const Matrix& input, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("sym_eigen: tol must be > 0");
  check_symmetric(input, tol);
  const std::size_t n = input.rows;

  Matrix A = input;
  Matrix V = Matrix::identity(n);
  const double norm_a = frobenius_norm(input);
  const double stop = tol * std::max(norm_a, 1e-300);

  const int max_sweeps = 100;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(A) <= stop) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double app = A(p, p);
        const double aqq = A(q, q);
        // Rotation angle per the classical Jacobi formulas.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diagonal_norm(A) > stop)
    throw std::runtime_error(
        "sym_eigen: Jacobi did not converge within 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return A(i, i) > A(j, j);
  });

  EigenResult r;
  r.values.resize(n);
  r.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.values[j] = A(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, j) = V(i, order[j]);
    normalize_column_sign(r.vectors, j);
  }

  // Reconstruction residual ||A V - V diag||_F / ||A||_F, kept as metadata.
  Matrix AV = matmul(input, r.vectors);
  double res = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double d = AV(i, j) - r.vectors(i, j) * r.values[j];
      res += d * d;
    }
  r.residual = std::sqrt(res) / std::max(norm_a, 1e-300);
  return r;
}

Matrix qr_orthonormalize(const Matrix& A) {
  if (A.cols > A.rows)
    throw std::invalid_argument("qr_orthonormalize: cols > rows");
  const std::size_t m = A.rows;
  const std::size_t n = A.cols;
  Matrix R = A;
  std::vector<std::vector<double>> reflectors;
  const double scale = std::max(frobenius_norm(A), 1e-300);

  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += R(i, k) * R(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-12 * scale)
      throw std::runtime_error(
          "qr_orthonormalize: rank deficiency at column " + std::to_string(k));

    std::vector<double> v(m, 0.0);
    const double alpha = (R(k, k) >= 0.0) ? -norm : norm;
    for (std::size_t i = k; i < m; ++i) v[i] = R(i, k);
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m; ++i) dot += v[i] * R(i, j);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < m; ++i) R(i, j) -= f * v[i];
      }
    }
    reflectors.push_back(std::move(v));
  }

  // Accumulate Q = H_0 ... H_{n-1} applied to the thin identity.
  Matrix Q(m, n);
  for (std::size_t j = 0; j < n; ++j) Q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    const auto& v = reflectors[k];
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i] * Q(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) Q(i, j) -= f * v[i];
    }
  }

  // Fix column signs so Q matches the input's column orientation.
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += Q(i, j) * A(i, j);
    if (dot < 0.0)
      for (std::size_t i = 0; i < m; ++i) Q(i, j) = -Q(i, j);
  }
  return Q;
}

std::vector<double> solve_dense(Matrix A, std::vector<double> b) {
  if (A.rows != A.cols)
    throw std::invalid_argument("solve_dense: matrix is not square");
  if (b.size() != A.rows)
    throw std::invalid_argument("solve_dense: rhs size mismatch");
  const std::size_t n = A.rows;
  const double scale = std::max(max_abs(A), 1e-300);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = std::abs(A(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best < 1e-12 * scale)
      throw std::runtime_error("solve_dense: matrix singular to threshold");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(b[k], b[piv]);
    }
    const double inv = 1.0 / A(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A(i, k) * inv;
      if (f == 0.0) continue;
      A(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
      b[i] -= f * b[k];
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x;
}

}  // namespace sfo
