#include "sfo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sfo {

namespace {

Matrix eigen_reconstruct(const Matrix& U, const std::vector<double>& diag) {
  const std::size_t d = U.rows;
  Matrix A(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += U(i, k) * diag[k] * U(j, k);
      A(i, j) = s;
    }
  return A;
}

double off_diagonal_max(const Matrix& A) {
  double m = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j)
      if (i != j) m = std::max(m, std::abs(A(i, j)));
  return m;
}

}  // namespace

Matrix StencilSpec::a0() const { return eigen_reconstruct(U, alpha); }
Matrix StencilSpec::a1() const { return eigen_reconstruct(U, beta); }

StencilSpec make_stencil(Matrix U, std::vector<double> alpha,
                         std::vector<double> beta) {
  const std::size_t d = U.rows;
  if (U.cols != d || alpha.size() != d || beta.size() != d)
    throw std::invalid_argument("make_stencil: dimension mismatch");
  const Matrix gram = matmul(transpose(U), U);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - want) > 1e-10)
        throw std::invalid_argument("make_stencil: U is not orthogonal");
    }
  StencilSpec s;
  s.d = d;
  s.U = std::move(U);
  s.alpha = std::move(alpha);
  s.beta = std::move(beta);
  return s;
}

StencilSpec scalar_stencil(double alpha, double beta) {
  Matrix U(1, 1);
  U(0, 0) = 1.0;
  return make_stencil(std::move(U), {alpha}, {beta});
}

StencilSpec stencil_from_matrices(const Matrix& A0, const Matrix& A1) {
  const std::size_t d = A0.rows;
  if (A0.cols != d || A1.rows != d || A1.cols != d)
    throw std::invalid_argument("stencil_from_matrices: matrices must be square and equal-sized");
  const double scale = std::max({max_abs(A0), max_abs(A1), 1e-30});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(A0(i, j) - A0(j, i)) > 1e-10 * scale ||
          std::abs(A1(i, j) - A1(j, i)) > 1e-10 * scale)
        throw std::invalid_argument("stencil_from_matrices: matrices must be symmetric");
    }
  const Matrix c01 = matmul(A0, A1);
  const Matrix c10 = matmul(A1, A0);
  for (std::size_t i = 0; i < d * d; ++i)
    if (std::abs(c01.a[i] - c10.a[i]) > 1e-10 * scale * scale)
      throw std::invalid_argument("stencil_from_matrices: matrices do not commute");

  // A generic symmetric combination separates shared eigenspaces; fall back
  // to other mixing weights if a coincidental degeneracy survives.
  for (const double c : {0.6180339887498949, 0.3819660112501051, 1.0, 0.25}) {
    Matrix M(d, d);
    for (std::size_t i = 0; i < d * d; ++i) M.a[i] = A0.a[i] + c * A1.a[i];
    const EigenResult e = sym_eigen(M);
    const Matrix d0 = matmul(transpose(e.vectors), matmul(A0, e.vectors));
    const Matrix d1 = matmul(transpose(e.vectors), matmul(A1, e.vectors));
    if (off_diagonal_max(d0) > 1e-9 * scale ||
        off_diagonal_max(d1) > 1e-9 * scale)
      continue;
    std::vector<double> alpha(d), beta(d);
    for (std::size_t k = 0; k < d; ++k) {
      alpha[k] = d0(k, k);
      beta[k] = d1(k, k);
    }
    return make_stencil(e.vectors, std::move(alpha), std::move(beta));
  }
  throw std::runtime_error(
      "stencil_from_matrices: failed to jointly diagonalize");
}

bool check_stability(const StencilSpec& spec) {
  for (std::size_t k = 0; k < spec.d; ++k)
    if (!(spec.alpha[k] > 2.0 * std::abs(spec.beta[k]))) return false;
  return true;
}

const Matrix& GreensKernel::at(long t) const {
  const long tm = static_cast<long>(t_max);
  if (t < -tm || t > tm)
    throw std::out_of_range("GreensKernel::at: |t| exceeds t_max");
  return g[static_cast<std::size_t>(t + tm)];
}

GreensKernel greens_closed_form(const StencilSpec& spec, std::size_t t_max) {
  if (!check_stability(spec))
    throw std::invalid_argument(
        "greens_closed_form: spec violates alpha > 2|beta|");
  GreensKernel G;
  G.d = spec.d;
  G.t_max = t_max;
  G.roots.assign(spec.d, 0.0);
  G.g.assign(2 * t_max + 1, Matrix(spec.d, spec.d));

  for (std::size_t k = 0; k < spec.d; ++k) {
    const double a = spec.alpha[k];
    const double b = spec.beta[k];
    double root = 0.0, scale = 0.0;
    if (b == 0.0) {
      scale = 1.0 / a;  // decoupled pair: g_k = delta(t=0)/alpha_k
    } else {
      const double disc = std::sqrt(a * a - 4.0 * b * b);
      root = (-a + disc) / (2.0 * b);
      scale = 1.0 / disc;
    }
    G.roots[k] = root;
    for (long t = -static_cast<long>(t_max); t <= static_cast<long>(t_max);
         ++t) {
      double gk;
      if (b == 0.0) {
        gk = (t == 0) ? scale : 0.0;
      } else {
        gk = scale * std::pow(root, std::abs(static_cast<double>(t)));
      }
      if (gk == 0.0) continue;
      Matrix& Gt = G.g[static_cast<std::size_t>(t + static_cast<long>(t_max))];
      for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.d; ++j)
          Gt(i, j) += spec.U(i, k) * spec.U(j, k) * gk;
    }
  }
  return G;
}

GreensKernel greens_numeric(const StencilSpec& spec, std::size_t N,
                            std::size_t t_max) {
  if (!check_stability(spec))
    throw std::invalid_argument("greens_numeric: unstable spec");
  if (N % 2 == 0 || N < 2 * t_max + 41)
    throw std::invalid_argument(
        "greens_numeric: need odd N >= 2*t_max + 41, got N=" +
        std::to_string(N));
  const std::size_t d = spec.d;
  const std::size_t dim = N * d;
  const std::size_t mid = N / 2;
  const Matrix A0 = spec.a0();
  const Matrix A1 = spec.a1();

  Matrix A(dim, dim);
  for (std::size_t b = 0; b < N; ++b)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        A(b * d + i, b * d + j) = A0(i, j);
        if (b + 1 < N) {
          A(b * d + i, (b + 1) * d + j) = A1(i, j);
          A((b + 1) * d + i, b * d + j) = A1(i, j);
        }
      }

  GreensKernel G;
  G.d = d;
  G.t_max = t_max;
  G.g.assign(2 * t_max + 1, Matrix(d, d));
  for (std::size_t p = 0; p < d; ++p) {
    std::vector<double> rhs(dim, 0.0);
    rhs[mid * d + p] = 1.0;
    const std::vector<double> x = solve_dense(A, std::move(rhs));
    for (long t = -static_cast<long>(t_max); t <= static_cast<long>(t_max);
         ++t) {
      Matrix& Gt = G.g[static_cast<std::size_t>(t + static_cast<long>(t_max))];
      const std::size_t b = static_cast<std::size_t>(
          static_cast<long>(mid) + t);
      for (std::size_t q = 0; q < d; ++q) Gt(q, p) = x[b * d + q];
    }
  }
  const GreensKernel closed = greens_closed_form(spec, 0);
  G.roots = closed.roots;
  return G;
}

std::vector<double> geometric_kernel(double c, double rho, std::size_t n) {
  if (std::abs(rho) >= 1.0)
    throw std::invalid_argument("geometric_kernel: require |rho| < 1");
  std::vector<double> g(n);
  const long half = static_cast<long>(n) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    long off = static_cast<long>(i);
    if (off > half) off -= static_cast<long>(n);  // signed offset in (-n/2, n/2]
    if (rho == 0.0) {
      g[i] = (off == 0) ? c : 0.0;
    } else {
      g[i] = c * std::pow(rho, std::abs(static_cast<double>(off)));
    }
  }
  return g;
}

std::vector<TruncationRow> truncation_study(const std::vector<double>& kernel,
                                            const std::vector<BasisKind>& kinds,
                                            const std::vector<std::size_t>& Ls,
                                            std::uint64_t seed) {
  const std::size_t n = kernel.size();
  std::vector<TruncationRow> rows;
  for (BasisKind kind : kinds) {
    std::size_t lmax = 0;
    for (std::size_t L : Ls) lmax = std::max(lmax, L);
    lmax = std::min(lmax, n);
    const SpectralBasis basis = build_basis(kind, n, std::max<std::size_t>(lmax, 1), seed);
    for (std::size_t L : Ls) {
      TruncationRow r;
      r.kind = kind;
      r.L = std::min(L, n);
      r.rel_error = project_truncate(kernel, basis, r.L).rel_error;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<ModesRow> modes_for_accuracy(const std::vector<double>& kernel,
                                         const SpectralBasis& basis,
                                         const std::vector<double>& eps_list) {
  // Errors of nested projections are non-increasing in L, so a single pass
  // over L serves every epsilon.
  std::vector<double> err(basis.L + 1);
  for (std::size_t L = 0; L <= basis.L; ++L)
    err[L] = project_truncate(kernel, basis, L).rel_error;

  std::vector<ModesRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0) || !(eps < 1.0 + 1e-15))
      throw std::invalid_argument("modes_for_accuracy: eps must be in (0, 1]");
    ModesRow r;
    r.eps = eps;
    r.saturated = true;
    for (std::size_t L = 0; L <= basis.L; ++L)
      if (err[L] <= eps) {
        r.L = L;
        r.saturated = false;
        break;
      }
    if (r.saturated) r.L = basis.L;
    rows.push_back(r);
  }
  return rows;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate x");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.intercept + f.slope * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  f.r_squared = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

StencilSpec diffusion_reaction_stencil(const Matrix& D, const Matrix& R,
                                       double h) {
  if (h <= 0.0)
    throw std::invalid_argument("diffusion_reaction_stencil: h must be > 0");
  const StencilSpec joint = stencil_from_matrices(D, R);  // reuse the joint
  // diagonalization; alpha holds D's spectrum, beta holds R's.
  for (std::size_t k = 0; k < joint.d; ++k)
    if (joint.alpha[k] <= 0.0 || joint.beta[k] <= 0.0)
      throw std::invalid_argument(
          "diffusion_reaction_stencil: D and R must be positive definite");
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> alpha(joint.d), beta(joint.d);
  for (std::size_t k = 0; k < joint.d; ++k) {
    alpha[k] = joint.beta[k] + 2.0 * inv_h2 * joint.alpha[k];
    beta[k] = -inv_h2 * joint.alpha[k];
  }
  return make_stencil(joint.U, std::move(alpha), std::move(beta));
}

std::vector<double> kernel_profile(double c, double rho, std::size_t n) {
  if (std::abs(rho) >= 1.0)
    throw std::invalid_argument("kernel_profile: require |rho| < 1");
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t)
    g[t] = (rho == 0.0) ? (t == 0 ? c : 0.0)
                        : c * std::pow(rho, static_cast<double>(t));
  return g;
}

std::vector<double> greens_kernel_profile(const StencilSpec& spec,
                                          std::size_t n) {
  if (spec.d != 1)
    throw std::invalid_argument("greens_kernel_profile: scalar specs only");
  const GreensKernel G = greens_closed_form(spec, n - 1);
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t)
    g[t] = G.at(static_cast<long>(t))(0, 0);
  return g;
}

std::vector<double> greens_decay_profile(const StencilSpec& spec,
                                         std::size_t n) {
  std::vector<double> g = greens_kernel_profile(spec, n);
  for (double& x : g) x = std::abs(x);
  return g;
}

std::vector<double> greens_kernel_samples(const StencilSpec& spec,
                                          std::size_t n) {
  if (spec.d != 1)
    throw std::invalid_argument("greens_kernel_samples: scalar specs only");
  const GreensKernel G = greens_closed_form(spec, n / 2);
  std::vector<double> g(n);
  const long half = static_cast<long>(n) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    long off = static_cast<long>(i);
    if (off > half) off -= static_cast<long>(n);
    g[i] = G.at(std::abs(off))(0, 0);
  }
  return g;
}

}  // namespace sfo
