#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfo/fft.hpp"
#include "sfo/matrix.hpp"

namespace sfo {

enum class BasisKind { USB, Fourier, Chebyshev, RandomOrthogonal };

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

// An n x L column-orthonormal filter bank. Filter column entry t is read at
// circular offset t, so entry 0 maps to offset 0.
struct SpectralBasis {
  BasisKind kind = BasisKind::USB;
  std::size_t n = 0;
  std::size_t L = 0;
  Matrix filters;                       // n x L
  std::vector<double> eigenvalues;      // USB only, descending
  std::uint64_t seed = 0;               // RandomOrthogonal only
  double eigen_residual = 0.0;          // USB eigensolver residual, metadata
  std::vector<ComplexBuffer> spectra;   // fft of each filter column

  std::vector<double> filter_column(std::size_t l) const;
};

enum class IndexScheme { Tied, Multi };

std::string to_string(IndexScheme s);
IndexScheme index_scheme_from_string(const std::string& s);

// M-dimensional modes on an n^M grid. Tied: K = L modes, the M-fold product
// of one column with itself. Multi: K = L^M, all index tuples in
// lexicographic order.
struct ModeSet {
  std::size_t arity = 1;
  IndexScheme scheme = IndexScheme::Tied;
  std::size_t n = 0;  // per-axis size
  std::size_t K = 0;
  std::vector<std::vector<double>> filters;  // K tensors, row-major n^M
  std::vector<ComplexBuffer> spectra;        // M-dimensional transforms
};

Matrix hilbert_matrix(std::size_t n);

SpectralBasis build_basis(BasisKind kind, std::size_t n, std::size_t L,
                          std::uint64_t seed = 0);

ModeSet extend_modes(const SpectralBasis& basis, std::size_t arity,
                     IndexScheme scheme);

struct ProjectResult {
  std::vector<double> coefficients;
  std::vector<double> reconstruction;
  double rel_error = 0.0;
};

ProjectResult project_truncate(const std::vector<double>& g,
                               const SpectralBasis& basis, std::size_t Lp);

}  // namespace sfo
