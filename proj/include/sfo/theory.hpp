#pragma once

#include <cstdint>
#include <vector>

#include "sfo/basis.hpp"
#include "sfo/matrix.hpp"

namespace sfo {

// Block three-point stencil A(u)[t] = A1 u[t-1] + A0 u[t] + A1 u[t+1] with
// A0 = U diag(alpha) U^T and A1 = U diag(beta) U^T, so the symmetric and
// commuting hypotheses hold by construction.
struct StencilSpec {
  std::size_t d = 1;
  Matrix U;
  std::vector<double> alpha;
  std::vector<double> beta;

  Matrix a0() const;
  Matrix a1() const;
};

// Builds a spec from its joint eigen-decomposition; U must be orthogonal.
StencilSpec make_stencil(Matrix U, std::vector<double> alpha,
                         std::vector<double> beta);

StencilSpec scalar_stencil(double alpha, double beta);

// Validation path for raw matrices: checks symmetry and commutativity to
// 1e-10 relative, then jointly diagonalizes.
StencilSpec stencil_from_matrices(const Matrix& A0, const Matrix& A1);

// Stability: alpha_j > 2|beta_j| for every joint eigenpair.
bool check_stability(const StencilSpec& spec);

// Matrix-valued kernel samples G[-t_max .. t_max], symmetric in t.
struct GreensKernel {
  std::size_t d = 1;
  std::size_t t_max = 0;
  std::vector<Matrix> g;       // index t + t_max
  std::vector<double> roots;   // per eigenpair, |r_k| < 1 (0 when beta_k = 0)

  const Matrix& at(long t) const;
};

// G[t] = sum_k (U_k U_k^T) r_k^|t| / sqrt(alpha_k^2 - 4 beta_k^2), with the
// beta_k = 0 pairs contributing delta(t=0) U_k U_k^T / alpha_k.
GreensKernel greens_closed_form(const StencilSpec& spec, std::size_t t_max);

// Dense inverse of the stencil on a centered window of N grid points;
// requires N odd and N >= 2*t_max + 41 so boundary effects stay below the
// comparison tolerances.
GreensKernel greens_numeric(const StencilSpec& spec, std::size_t N,
                            std::size_t t_max);

// g[i] = c * rho^|offset(i)| on the circular grid, offsets in (-n/2, n/2].
std::vector<double> geometric_kernel(double c, double rho, std::size_t n);

struct TruncationRow {
  BasisKind kind;
  std::size_t L = 0;
  double rel_error = 0.0;
};

// Projection error of the kernel onto each basis kind at each L; the random
// orthogonal basis uses the given seed.
std::vector<TruncationRow> truncation_study(const std::vector<double>& kernel,
                                            const std::vector<BasisKind>& kinds,
                                            const std::vector<std::size_t>& Ls,
                                            std::uint64_t seed = 0);

struct ModesRow {
  double eps = 0.0;
  std::size_t L = 0;       // minimal L with rel_error <= eps
  bool saturated = false;  // eps unreachable even at L = n
};

std::vector<ModesRow> modes_for_accuracy(const std::vector<double>& kernel,
                                         const SpectralBasis& basis,
                                         const std::vector<double>& eps_list);

// Least-squares line fit y ~ a + b x; returns (slope, r_squared).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Steady coupled diffusion-reaction discretization: A0 = R + (2/h^2) D,
// A1 = -(1/h^2) D, for SPD commuting D, R.
StencilSpec diffusion_reaction_stencil(const Matrix& D, const Matrix& R,
                                       double h);

// 1D samples of a Green's kernel on the circular grid (scalar specs).
std::vector<double> greens_kernel_samples(const StencilSpec& spec,
                                          std::size_t n);

// Offset-magnitude profiles: symmetric kernels are determined by their values
// at offsets t = 0..n-1, and the filter bank compresses these one-sided
// sequences. The truncation studies operate on profiles.
std::vector<double> kernel_profile(double c, double rho, std::size_t n);
std::vector<double> greens_kernel_profile(const StencilSpec& spec,
                                          std::size_t n);

// Decay envelope |G[t]| of a scalar Green's kernel; the mode-complexity
// study L(eps) is run on this envelope (oscillating-sign kernels split their
// energy across the numerically unreliable Hilbert tail, the envelope does
// not).
std::vector<double> greens_decay_profile(const StencilSpec& spec,
                                         std::size_t n);

}  // namespace sfo
