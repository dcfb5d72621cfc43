#include "sfo/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "sfo/fft.hpp"
#include "sfo/util.hpp"

namespace sfo {

namespace {

const double kPi = 3.14159265358979323846264338327950288;

void rescale_to_band(std::vector<double>& u, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
  const double range = *mx - *mn;
  if (range < 1e-12) {
    std::fill(u.begin(), u.end(), 0.5 * (lo + hi));
    return;
  }
  const double scale = (hi - lo) / range;
  for (double& x : u) x = lo + (x - *mn) * scale;
}

void validate_grid_size(std::size_t n) {
  if (n < 8 || !is_power_of_two(n))
    throw std::invalid_argument("grid size must be a power of two >= 8");
}

}  // namespace

std::size_t Grid::total() const {
  std::size_t t = 1;
  for (std::size_t s : sizes) t *= s;
  return t;
}

std::vector<double> solve_cyclic_tridiagonal(double diag, double off,
                                             const std::vector<double>& b) {
  const std::size_t n = b.size();
  if (n == 0) throw std::invalid_argument("solve_cyclic_tridiagonal: empty");
  if (n == 1) return {b[0] / (diag + 2.0 * off)};
  if (n == 2) {
    // both neighbors wrap to the same point
    const double d = diag, o = 2.0 * off;
    const double det = d * d - o * o;
    return {(d * b[0] - o * b[1]) / det, (d * b[1] - o * b[0]) / det};
  }

  // Sherman-Morrison around the Thomas algorithm: the wrap terms are the
  // rank-one update u v^T with u = (gamma, 0, ..., 0, off)^T.
  const double gamma = -diag;
  auto thomas = [&](const std::vector<double>& rhs) {
    std::vector<double> c(n), x(n);
    double d0 = diag - gamma;
    double dn = diag - off * off / gamma;
    // forward sweep
    std::vector<double> dd(n, diag);
    dd[0] = d0;
    dd[n - 1] = dn;
    c[0] = off / dd[0];
    x[0] = rhs[0] / dd[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = dd[i] - off * c[i - 1];
      c[i] = off / m;
      x[i] = (rhs[i] - off * x[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
  };

  const std::vector<double> y = thomas(b);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = off;
  const std::vector<double> z = thomas(u);
  const double vy = y[0] + (off / gamma) * y[n - 1];
  const double vz = z[0] + (off / gamma) * z[n - 1];
  const double factor = vy / (1.0 + vz);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
  return x;
}

std::vector<double> diffusion_reaction_solve(const std::vector<double>& u0,
                                             std::size_t n_t,
                                             std::size_t substeps) {
  const std::size_t n = u0.size();
  if (n_t < 2) throw std::invalid_argument("diffusion_reaction_solve: n_t >= 2");
  if (substeps < 1) throw std::invalid_argument("substeps >= 1");
  const double nu = 0.5;
  const double h = 1.0 / static_cast<double>(n);
  const double dt = 1.0 / static_cast<double>(n_t * substeps);
  const double lam = nu * dt / (2.0 * h * h);
  const double diag = 1.0 + 2.0 * lam;
  const double off = -lam;

  auto reaction = [](double u) { return -u * (1.0 - u); };
  auto half_explicit = [&](const std::vector<double>& u) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lap = u[(i + n - 1) % n] - 2.0 * u[i] + u[(i + 1) % n];
      v[i] = u[i] + lam * lap;
    }
    return v;
  };

  std::vector<double> u = u0;
  std::vector<double> out;
  out.reserve(n_t * n);
  for (std::size_t j = 0; j < n_t; ++j) {
    for (std::size_t s = 0; s < substeps; ++s) {
      const std::vector<double> base = half_explicit(u);
      // predictor: Crank-Nicolson diffusion, explicit Euler reaction
      std::vector<double> rhs(n);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = base[i] + dt * reaction(u[i]);
      const std::vector<double> ustar = solve_cyclic_tridiagonal(diag, off, rhs);
      // corrector: Heun average of the reaction term
      for (std::size_t i = 0; i < n; ++i)
        rhs[i] = base[i] + 0.5 * dt * (reaction(u[i]) + reaction(ustar[i]));
      u = solve_cyclic_tridiagonal(diag, off, rhs);
      for (double x : u)
        if (!(std::abs(x) <= 10.0))
          throw std::runtime_error("diffusion-reaction solver blow-up");
    }
    out.insert(out.end(), u.begin(), u.end());
  }
  return out;
}

Dataset gen_diffusion_reaction_1d(std::size_t n, std::size_t n_t,
                                  std::size_t N, std::uint64_t seed,
                                  std::size_t substeps) {
  validate_grid_size(n);
  if (n_t < 2) throw std::invalid_argument("gen_diffusion_reaction_1d: n_t >= 2");
  if (N < 2) throw std::invalid_argument("gen_diffusion_reaction_1d: N >= 2");

  Dataset ds;
  ds.grid.sizes = {n};
  ds.grid.spacing = {1.0 / static_cast<double>(n)};
  ds.N = N;
  ds.c_a = 2;
  ds.c_u = n_t;
  ds.pde = "diff-react-1d";
  ds.param = 0.5;
  ds.substeps = static_cast<std::uint32_t>(substeps);
  ds.seed = seed;
  ds.inputs.resize(N * ds.c_a * n);
  ds.targets.resize(N * ds.c_u * n);

  // Samples are independent (per-sample sub-seeds, disjoint output slices),
  // so the loop parallelizes without changing any output byte.
  std::uint32_t regenerated = 0;
  std::vector<unsigned char> solved_flags(N, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : regenerated)
#endif
  for (long long jj = 0; jj < static_cast<long long>(N); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    std::vector<double> u0(n), traj;
    bool solved = false;
    for (std::size_t attempt = 0; attempt < 64 && !solved; ++attempt) {
      Rng rng(derive_seed(seed, j * 4096 + attempt));
      std::fill(u0.begin(), u0.end(), 0.0);
      for (std::size_t k = 1; k <= 4; ++k) {
        const double a = rng.next_gaussian();
        const double b = rng.next_gaussian();
        for (std::size_t i = 0; i < n; ++i) {
          const double arg =
              2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(n);
          u0[i] += a * std::sin(arg) + b * std::cos(arg);
        }
      }
      rescale_to_band(u0, 0.05, 0.95);
      try {
        traj = diffusion_reaction_solve(u0, n_t, substeps);
        solved = true;
      } catch (const std::runtime_error&) {
        ++regenerated;
      }
    }
    solved_flags[j] = solved ? 1 : 0;
    if (!solved) continue;

    double* in = &ds.inputs[j * ds.c_a * n];
    for (std::size_t i = 0; i < n; ++i) {
      in[i] = u0[i];
      in[n + i] = static_cast<double>(i) / static_cast<double>(n);
    }
    std::copy(traj.begin(), traj.end(), ds.targets.begin() + long(j * ds.c_u * n));
  }
  ds.regenerated = regenerated;
  for (std::size_t j = 0; j < N; ++j)
    if (!solved_flags[j])
      throw std::runtime_error(
          "gen_diffusion_reaction_1d: repeated solver blow-up at sample " +
          std::to_string(j));
  return ds;
}

std::vector<double> heat_2d_evolve(const std::vector<double>& u0,
                                   std::size_t n, double nu, double t) {
  if (u0.size() != n * n)
    throw std::invalid_argument("heat_2d_evolve: field size mismatch");
  std::vector<double> re = u0, im(n * n, 0.0);
  const std::vector<std::size_t> shape{n, n};
  const std::vector<std::size_t> axes{0, 1};
  fft_nd_inplace(re, im, shape, axes, false);
  const double w = 4.0 * kPi * kPi * nu * t;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    const long m1 = (i1 <= n / 2) ? long(i1) : long(i1) - long(n);
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const long m2 = (i2 <= n / 2) ? long(i2) : long(i2) - long(n);
      const double decay = std::exp(-w * double(m1 * m1 + m2 * m2));
      re[i1 * n + i2] *= decay;
      im[i1 * n + i2] *= decay;
    }
  }
  fft_nd_inplace(re, im, shape, axes, true);
  return re;
}

Dataset gen_heat_2d(std::size_t n, std::size_t n_t, std::size_t N,
                    std::uint64_t seed, double diffusivity) {
  validate_grid_size(n);
  if (n_t < 2) throw std::invalid_argument("gen_heat_2d: n_t >= 2");
  if (N < 2) throw std::invalid_argument("gen_heat_2d: N >= 2");

  Dataset ds;
  ds.grid.sizes = {n, n};
  ds.grid.spacing = {1.0 / double(n), 1.0 / double(n)};
  ds.N = N;
  ds.c_a = 3;
  ds.c_u = n_t;
  ds.pde = "heat-2d";
  ds.param = diffusivity;
  ds.substeps = 1;  // spectral solution is exact
  ds.seed = seed;
  const std::size_t total = n * n;
  ds.inputs.resize(N * ds.c_a * total);
  ds.targets.resize(N * ds.c_u * total);

  // Independent samples with disjoint output slices; safe to parallelize.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long jj = 0; jj < static_cast<long long>(N); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    Rng rng(derive_seed(seed, j));
    std::vector<double> u0(total, 0.0);
    // band-limited field: harmonics up to wavenumber 4 on each axis
    for (long k1 = 0; k1 <= 4; ++k1)
      for (long k2 = (k1 == 0 ? 1 : -4); k2 <= 4; ++k2) {
        const double a = rng.next_gaussian();
        const double b = rng.next_gaussian();
        for (std::size_t i1 = 0; i1 < n; ++i1)
          for (std::size_t i2 = 0; i2 < n; ++i2) {
            const double arg = 2.0 * kPi *
                               (double(k1) * double(i1) +
                                double(k2) * double(i2)) /
                               double(n);
            u0[i1 * n + i2] += a * std::cos(arg) + b * std::sin(arg);
          }
      }
    rescale_to_band(u0, 0.05, 0.95);

    double* in = &ds.inputs[j * ds.c_a * total];
    for (std::size_t i1 = 0; i1 < n; ++i1)
      for (std::size_t i2 = 0; i2 < n; ++i2) {
        in[i1 * n + i2] = u0[i1 * n + i2];
        in[total + i1 * n + i2] = double(i1) / double(n);
        in[2 * total + i1 * n + i2] = double(i2) / double(n);
      }
    for (std::size_t s = 1; s <= n_t; ++s) {
      const double t = double(s) / double(n_t);
      const std::vector<double> ut = heat_2d_evolve(u0, n, diffusivity, t);
      std::copy(ut.begin(), ut.end(),
                ds.targets.begin() + long(j * ds.c_u * total + (s - 1) * total));
    }
  }
  return ds;
}

double rel_l2(const std::vector<double>& u_true,
              const std::vector<double>& u_pred, std::size_t N) {
  if (u_true.size() != u_pred.size() || N == 0 || u_true.size() % N != 0)
    throw std::invalid_argument("rel_l2: shape mismatch");
  const std::size_t len = u_true.size() / N;
  double acc = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double t = u_true[j * len + i];
      const double d = t - u_pred[j * len + i];
      num += d * d;
      den += t * t;
    }
    if (den == 0.0)
      throw std::invalid_argument("rel_l2: zero-norm target at sample " +
                                  std::to_string(j));
    acc += std::sqrt(num / den);
  }
  return 100.0 * acc / static_cast<double>(N);
}

BandErrors boundary_interior_errors(const std::vector<double>& u_true,
                                    const std::vector<double>& u_pred,
                                    const Grid& grid, std::size_t N,
                                    std::size_t channels,
                                    double band_fraction) {
  const std::size_t total = grid.total();
  if (u_true.size() != N * channels * total || u_pred.size() != u_true.size())
    throw std::invalid_argument("boundary_interior_errors: shape mismatch");
  const std::size_t b = static_cast<std::size_t>(
      std::floor(band_fraction * static_cast<double>(grid.sizes[0])));
  if (b < 1)
    throw std::invalid_argument("boundary_interior_errors: band width < 1");

  std::vector<bool> on_boundary(total, false);
  std::size_t boundary_count = 0;
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    bool bdry = false;
    for (std::size_t m = grid.arity(); m-- > 0;) {
      const std::size_t nm = grid.sizes[m];
      const std::size_t c = rem % nm;
      rem /= nm;
      if (c < b || c >= nm - b) bdry = true;
    }
    on_boundary[p] = bdry;
    if (bdry) ++boundary_count;
  }
  if (boundary_count == total)
    throw std::invalid_argument("boundary_interior_errors: empty interior");

  auto restricted = [&](int which) {  // 0 full, 1 boundary, 2 interior
    double acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t p = 0; p < total; ++p) {
          if (which == 1 && !on_boundary[p]) continue;
          if (which == 2 && on_boundary[p]) continue;
          const std::size_t idx = (j * channels + c) * total + p;
          const double t = u_true[idx];
          const double d = t - u_pred[idx];
          num += d * d;
          den += t * t;
        }
      if (den == 0.0)
        throw std::invalid_argument(
            "boundary_interior_errors: zero-norm restricted target");
      acc += std::sqrt(num / den);
    }
    return 100.0 * acc / static_cast<double>(N);
  };

  BandErrors e;
  e.band = b;
  e.full = restricted(0);
  e.boundary = restricted(1);
  e.interior = restricted(2);
  return e;
}

Dataset subsample(const Dataset& ds, std::size_t s) {
  if (s == 0) throw std::invalid_argument("subsample: s >= 1");
  if (s == 1) return ds;
  Dataset out;
  out.grid.sizes.resize(ds.grid.arity());
  out.grid.spacing.resize(ds.grid.arity());
  for (std::size_t m = 0; m < ds.grid.arity(); ++m) {
    if (ds.grid.sizes[m] % s != 0)
      throw std::invalid_argument("subsample: stride does not divide axis size");
    out.grid.sizes[m] = ds.grid.sizes[m] / s;
    if (!is_power_of_two(out.grid.sizes[m]))
      throw std::invalid_argument("subsample: result size not a power of two");
    out.grid.spacing[m] = ds.grid.spacing[m] * static_cast<double>(s);
  }
  out.N = ds.N;
  out.c_a = ds.c_a;
  out.c_u = ds.c_u;
  out.pde = ds.pde;
  out.param = ds.param;
  out.substeps = ds.substeps;
  out.seed = ds.seed;
  out.regenerated = ds.regenerated;

  const std::size_t total = ds.grid.total();
  const std::size_t total2 = out.grid.total();
  auto pick = [&](const std::vector<double>& src, std::vector<double>& dst,
                  std::size_t channels) {
    dst.resize(ds.N * channels * total2);
    for (std::size_t jc = 0; jc < ds.N * channels; ++jc)
      for (std::size_t p2 = 0; p2 < total2; ++p2) {
        // map the coarse multi-index to the fine grid at stride s
        std::size_t rem = p2, p = 0, stride = 1;
        for (std::size_t m = ds.grid.arity(); m-- > 0;) {
          const std::size_t c2 = rem % out.grid.sizes[m];
          rem /= out.grid.sizes[m];
          p += c2 * s * stride;
          stride *= ds.grid.sizes[m];
        }
        dst[jc * total2 + p2] = src[jc * total + p];
      }
  };
  pick(ds.inputs, out.inputs, ds.c_a);
  pick(ds.targets, out.targets, ds.c_u);
  return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write("SFODATA1", 8);
  write_pod<std::uint32_t>(f, 1u);  // version
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(ds.grid.arity()));
  for (std::size_t sz : ds.grid.sizes)
    write_pod<std::uint64_t>(f, static_cast<std::uint64_t>(sz));
  for (double sp : ds.grid.spacing) write_pod<double>(f, sp);
  write_pod<std::uint64_t>(f, static_cast<std::uint64_t>(ds.N));
  write_pod<std::uint64_t>(f, static_cast<std::uint64_t>(ds.c_a));
  write_pod<std::uint64_t>(f, static_cast<std::uint64_t>(ds.c_u));
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(ds.pde.size()));
  f.write(ds.pde.data(), static_cast<std::streamsize>(ds.pde.size()));
  write_pod<double>(f, ds.param);
  write_pod<std::uint32_t>(f, ds.substeps);
  write_pod<std::uint64_t>(f, ds.seed);
  write_pod<std::uint32_t>(f, ds.regenerated);
  write_f64_array(f, ds.inputs);
  write_f64_array(f, ds.targets);
  if (!f) throw std::runtime_error("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "SFODATA1")
    throw std::runtime_error("bad dataset magic in " + path);
  const auto version = read_pod<std::uint32_t>(f, "version");
  if (version != 1)
    throw std::runtime_error("unsupported dataset version " +
                             std::to_string(version) + " in " + path);

  Dataset ds;
  const auto arity = read_pod<std::uint32_t>(f, "grid arity");
  if (arity < 1 || arity > 3)
    throw std::runtime_error("dataset grid arity out of range in " + path);
  ds.grid.sizes.resize(arity);
  ds.grid.spacing.resize(arity);
  for (auto& sz : ds.grid.sizes)
    sz = static_cast<std::size_t>(read_pod<std::uint64_t>(f, "grid size"));
  for (auto& sp : ds.grid.spacing) sp = read_pod<double>(f, "grid spacing");
  ds.N = static_cast<std::size_t>(read_pod<std::uint64_t>(f, "sample count"));
  ds.c_a = static_cast<std::size_t>(read_pod<std::uint64_t>(f, "input channels"));
  ds.c_u = static_cast<std::size_t>(read_pod<std::uint64_t>(f, "target channels"));
  const auto name_len = read_pod<std::uint32_t>(f, "pde name length");
  ds.pde.resize(name_len);
  f.read(ds.pde.data(), name_len);
  if (!f) throw std::runtime_error("truncated pde name in " + path);
  ds.param = read_pod<double>(f, "pde parameter");
  ds.substeps = read_pod<std::uint32_t>(f, "solver substeps");
  ds.seed = read_pod<std::uint64_t>(f, "seed");
  ds.regenerated = read_pod<std::uint32_t>(f, "regeneration count");

  const std::size_t total = ds.grid.total();
  ds.inputs.resize(ds.N * ds.c_a * total);
  ds.targets.resize(ds.N * ds.c_u * total);
  try {
    read_f64_array(f, ds.inputs, "input payload");
    read_f64_array(f, ds.targets, "target payload");
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " in " + path);
  }
  return ds;
}

std::string dataset_header_json(const Dataset& ds) {
  nlohmann::json j;
  j["magic"] = "SFODATA1";
  j["version"] = 1;
  j["grid"] = {{"sizes", ds.grid.sizes}, {"spacing", ds.grid.spacing}};
  j["samples"] = ds.N;
  j["input_channels"] = ds.c_a;
  j["target_channels"] = ds.c_u;
  j["pde"] = ds.pde;
  j["param"] = ds.param;
  j["substeps"] = ds.substeps;
  j["seed"] = ds.seed;
  j["regenerated"] = ds.regenerated;
  return j.dump(2);
}

}  // namespace sfo
