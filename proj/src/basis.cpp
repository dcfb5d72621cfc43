#include "sfo/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "sfo/util.hpp"

namespace sfo {

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::USB: return "usb";
    case BasisKind::Fourier: return "fourier";
    case BasisKind::Chebyshev: return "chebyshev";
    case BasisKind::RandomOrthogonal: return "random";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "usb") return BasisKind::USB;
  if (s == "fourier") return BasisKind::Fourier;
  if (s == "chebyshev") return BasisKind::Chebyshev;
  if (s == "random") return BasisKind::RandomOrthogonal;
  throw std::invalid_argument("unknown basis kind: " + s);
}

std::string to_string(IndexScheme s) {
  return s == IndexScheme::Tied ? "tied" : "multi";
}

IndexScheme index_scheme_from_string(const std::string& s) {
  if (s == "tied") return IndexScheme::Tied;
  if (s == "multi") return IndexScheme::Multi;
  throw std::invalid_argument("unknown index scheme: " + s);
}

std::vector<double> SpectralBasis::filter_column(std::size_t l) const {
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = filters(i, l);
  return c;
}

Matrix hilbert_matrix(std::size_t n) {
  if (n < 1) throw std::invalid_argument("hilbert_matrix: n must be >= 1");
  Matrix H(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      H(i, j) = 1.0 / static_cast<double>(i + j + 1);
  return H;
}

namespace {

const double kPi = 3.14159265358979323846264338327950288;

Matrix usb_filters(std::size_t n, std::size_t L, std::vector<double>& eigs,
                   double& residual) {
  const EigenResult e = sym_eigen(hilbert_matrix(n));
  residual = e.residual;
  eigs.assign(e.values.begin(), e.values.begin() + static_cast<long>(L));
  for (std::size_t l = 0; l < L; ++l) {
    if (eigs[l] <= 0.0)
      throw std::runtime_error(
          "build_basis: retained Hilbert eigenvalue is not positive at mode " +
          std::to_string(l + 1) + "; reduce L");
    if (l > 0 && eigs[l] > eigs[l - 1])
      throw std::runtime_error("build_basis: eigenvalues not descending");
  }
  Matrix F(n, L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < L; ++l) F(i, l) = e.vectors(i, l);
  return F;
}

// Real harmonics at grid points i/n, ordered DC, cos1, sin1, cos2, ...
// Discretely orthogonal, so normalization is exact.
Matrix fourier_filters(std::size_t n, std::size_t L) {
  Matrix F(n, L);
  std::size_t col = 0;
  std::size_t k = 0;
  bool is_sin = false;
  while (col < L) {
    std::vector<double> v(n);
    if (k == 0) {
      for (std::size_t i = 0; i < n; ++i) v[i] = 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double arg = 2.0 * kPi * static_cast<double>(k * i) /
                           static_cast<double>(n);
        v[i] = is_sin ? std::sin(arg) : std::cos(arg);
      }
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 1e-12) {  // sin at Nyquist vanishes identically; skip it
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t i = 0; i < n; ++i) F(i, col) = v[i] * inv;
      ++col;
    }
    if (k == 0 || is_sin) {
      ++k;
      is_sin = false;
    } else {
      is_sin = true;
    }
    if (k > n) throw std::runtime_error("fourier_filters: exhausted harmonics");
  }
  return F;
}

// T_0 .. T_{L-1} sampled at grid midpoints mapped to [-1, 1], then QR.
Matrix chebyshev_filters(std::size_t n, std::size_t L) {
  Matrix C(n, L);
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        2.0 * ((static_cast<double>(i) + 0.5) / static_cast<double>(n)) - 1.0;
    double tkm1 = 1.0, tk = x;
    for (std::size_t l = 0; l < L; ++l) {
      double val;
      if (l == 0) {
        val = 1.0;
      } else if (l == 1) {
        val = x;
      } else {
        val = 2.0 * x * tk - tkm1;
        tkm1 = tk;
        tk = val;
      }
      C(i, l) = val;
    }
  }
  return qr_orthonormalize(C);
}

Matrix random_filters(std::size_t n, std::size_t L, std::uint64_t seed) {
  Rng rng(seed);
  Matrix G(n, L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < L; ++l) G(i, l) = rng.next_gaussian();
  return qr_orthonormalize(G);
}

}  // namespace

SpectralBasis build_basis(BasisKind kind, std::size_t n, std::size_t L,
                          std::uint64_t seed) {
  if (L < 1 || L > n)
    throw std::invalid_argument("build_basis: require 1 <= L <= n, got L=" +
                                std::to_string(L) + " n=" + std::to_string(n));
  if (!is_power_of_two(n))
    throw std::invalid_argument("build_basis: n must be a power of two");

  SpectralBasis b;
  b.kind = kind;
  b.n = n;
  b.L = L;
  b.seed = seed;
  switch (kind) {
    case BasisKind::USB:
      b.filters = usb_filters(n, L, b.eigenvalues, b.eigen_residual);
      break;
    case BasisKind::Fourier:
      b.filters = fourier_filters(n, L);
      break;
    case BasisKind::Chebyshev:
      b.filters = chebyshev_filters(n, L);
      break;
    case BasisKind::RandomOrthogonal:
      b.filters = random_filters(n, L, seed);
      break;
  }

  b.spectra.reserve(L);
  for (std::size_t l = 0; l < L; ++l)
    b.spectra.push_back(fft_real(b.filter_column(l)));
  return b;
}

ModeSet extend_modes(const SpectralBasis& basis, std::size_t arity,
                     IndexScheme scheme) {
  if (arity < 1 || arity > 3)
    throw std::invalid_argument("extend_modes: arity must be in {1,2,3}");
  const std::size_t n = basis.n;
  const std::size_t L = basis.L;

  std::size_t K = L;
  if (scheme == IndexScheme::Multi) {
    K = 1;
    for (std::size_t m = 0; m < arity; ++m) {
      K *= L;
      if (K > 10000)
        throw std::invalid_argument(
            "extend_modes: multi-index mode count L^M exceeds budget of 1e4");
    }
  }

  std::size_t total = 1;
  for (std::size_t m = 0; m < arity; ++m) total *= n;

  ModeSet ms;
  ms.arity = arity;
  ms.scheme = scheme;
  ms.n = n;
  ms.K = K;
  ms.filters.reserve(K);
  ms.spectra.reserve(K);

  std::vector<std::size_t> shape(arity, n);
  std::vector<std::size_t> axes(arity);
  for (std::size_t m = 0; m < arity; ++m) axes[m] = m;

  for (std::size_t k = 0; k < K; ++k) {
    // Axis indices for mode k: tied repeats k; multi decodes lexicographic
    // tuples (first axis most significant).
    std::vector<std::size_t> idx(arity, k);
    if (scheme == IndexScheme::Multi) {
      std::size_t rem = k;
      for (std::size_t m = arity; m-- > 0;) {
        idx[m] = rem % L;
        rem /= L;
      }
    }
    std::vector<double> f(total);
    for (std::size_t p = 0; p < total; ++p) {
      std::size_t rem = p;
      double prod = 1.0;
      for (std::size_t m = arity; m-- > 0;) {
        prod *= basis.filters(rem % n, idx[m]);
        rem /= n;
      }
      f[p] = prod;
    }
    ComplexBuffer spec(total);
    spec.re = f;
    fft_nd_inplace(spec.re, spec.im, shape, axes, false);
    ms.filters.push_back(std::move(f));
    ms.spectra.push_back(std::move(spec));
  }
  return ms;
}

ProjectResult project_truncate(const std::vector<double>& g,
                               const SpectralBasis& basis, std::size_t Lp) {
  if (g.size() != basis.n)
    throw std::invalid_argument("project_truncate: length mismatch");
  if (Lp > basis.L)
    throw std::invalid_argument("project_truncate: L' exceeds basis L");

  ProjectResult r;
  r.coefficients.assign(Lp, 0.0);
  r.reconstruction.assign(basis.n, 0.0);

  double gnorm2 = 0.0;
  for (double x : g) gnorm2 += x * x;
  if (gnorm2 == 0.0) {
    r.rel_error = 0.0;
    return r;
  }

  for (std::size_t l = 0; l < Lp; ++l) {
    double dot = 0.0;
    for (std::size_t i = 0; i < basis.n; ++i) dot += g[i] * basis.filters(i, l);
    r.coefficients[l] = dot;
    for (std::size_t i = 0; i < basis.n; ++i)
      r.reconstruction[i] += dot * basis.filters(i, l);
  }

  double err2 = 0.0;
  for (std::size_t i = 0; i < basis.n; ++i) {
    const double d = g[i] - r.reconstruction[i];
    err2 += d * d;
  }
  r.rel_error = std::sqrt(err2 / gnorm2);
  return r;
}

}  // namespace sfo
