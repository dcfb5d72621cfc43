#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sfo {

struct Grid {
  std::vector<std::size_t> sizes;  // per axis, powers of two, >= 8
  std::vector<double> spacing;     // domain length 1 per axis

  std::size_t arity() const { return sizes.size(); }
  std::size_t total() const;
};

// Sample-major storage, channel-then-grid within a sample.
struct Dataset {
  Grid grid;
  std::size_t N = 0;
  std::size_t c_a = 0;
  std::size_t c_u = 0;
  std::vector<double> inputs;   // N * c_a * total
  std::vector<double> targets;  // N * c_u * total

  std::string pde;
  double param = 0.0;      // diffusivity
  std::uint32_t substeps = 0;  // solver refinement over the output grid
  std::uint64_t seed = 0;
  std::uint32_t regenerated = 0;  // samples redrawn after solver blow-up

  const double* input(std::size_t j) const {
    return &inputs[j * c_a * grid.total()];
  }
  const double* target(std::size_t j) const {
    return &targets[j * c_u * grid.total()];
  }
};

// u_t = 0.5 u_xx - u(1-u), periodic on [0,1); band-limited initial data
// rescaled to [0.05, 0.95]; inputs are (u0, x) channels, targets the n_t
// snapshots at t = j/n_t. The solver runs `substeps` implicit-diffusion /
// explicit-reaction steps per output interval (Crank-Nicolson diffusion via
// a cyclic tridiagonal solve, Heun-corrected reaction). The default
// refinement keeps the step-halving drift below 1e-4 and the trajectories
// inside the maximum-principle band at the desk resolutions.
Dataset gen_diffusion_reaction_1d(std::size_t n, std::size_t n_t,
                                  std::size_t N, std::uint64_t seed,
                                  std::size_t substeps = 16);

// Periodic heat equation on the unit square, solved exactly per Fourier mode
// (e^{-nu |k|^2 t}); inputs are (u0, x, y) channels.
Dataset gen_heat_2d(std::size_t n, std::size_t n_t, std::size_t N,
                    std::uint64_t seed, double diffusivity = 0.05);

// One diffusion-reaction trajectory from a given initial field; returns the
// n_t snapshots concatenated. Throws on blow-up (any |u| > 10).
std::vector<double> diffusion_reaction_solve(const std::vector<double>& u0,
                                             std::size_t n_t,
                                             std::size_t substeps);

// Exact spectral heat evolution of a single 2D field to time t.
std::vector<double> heat_2d_evolve(const std::vector<double>& u0,
                                   std::size_t n, double nu, double t);

// Constant-coefficient symmetric cyclic tridiagonal solve:
// (diag) x_i + (off)(x_{i-1} + x_{i+1}) = b_i, indices mod n.
std::vector<double> solve_cyclic_tridiagonal(double diag, double off,
                                             const std::vector<double>& b);

// Mean relative L2 error in percent: 100/N * sum ||u - u_hat|| / ||u||.
double rel_l2(const std::vector<double>& u_true,
              const std::vector<double>& u_pred, std::size_t N);

struct BandErrors {
  double full = 0.0;      // percent
  double boundary = 0.0;  // width-b band at each axis edge
  double interior = 0.0;
  std::size_t band = 0;   // b = floor(0.1 * axis size)
};

// Restricted relative L2 over the boundary band (points within b of any axis
// edge) and the interior, per sample with c channels, averaged over N.
BandErrors boundary_interior_errors(const std::vector<double>& u_true,
                                    const std::vector<double>& u_pred,
                                    const Grid& grid, std::size_t N,
                                    std::size_t channels,
                                    double band_fraction = 0.1);

// Every s-th grid point along each spatial axis of inputs and targets.
Dataset subsample(const Dataset& ds, std::size_t s);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string dataset_header_json(const Dataset& ds);

}  // namespace sfo
