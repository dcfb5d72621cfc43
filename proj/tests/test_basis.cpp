#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sfo/basis.hpp"
#include "sfo/theory.hpp"
#include "sfo/util.hpp"

using namespace sfo;

namespace {

double gram_dev(const Matrix& Phi) {
  double dev = 0.0;
  for (std::size_t a = 0; a < Phi.cols; ++a)
    for (std::size_t b = 0; b < Phi.cols; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < Phi.rows; ++i) dot += Phi(i, a) * Phi(i, b);
      dev = std::max(dev, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  return dev;
}

const std::vector<BasisKind> kAllKinds{BasisKind::USB, BasisKind::Fourier,
                                       BasisKind::Chebyshev,
                                       BasisKind::RandomOrthogonal};

}  // namespace

TEST_CASE("hilbert matrix entries") {
  const Matrix H1 = hilbert_matrix(1);
  CHECK(H1(0, 0) == 1.0);
  const Matrix H2 = hilbert_matrix(2);
  CHECK(H2(0, 0) == 1.0);
  CHECK(H2(0, 1) == 0.5);
  CHECK(H2(1, 0) == 0.5);
  CHECK(H2(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
  CHECK(hilbert_matrix(3)(2, 2) == doctest::Approx(0.2).epsilon(1e-16));
}

TEST_CASE("every basis kind is orthonormal at the working sizes") {
  for (BasisKind kind : kAllKinds) {
    for (auto [n, L] : {std::pair<std::size_t, std::size_t>{64, 16},
                        std::pair<std::size_t, std::size_t>{256, 20}}) {
      const SpectralBasis b = build_basis(kind, n, L, 3);
      CHECK(gram_dev(b.filters) <= 1e-10);
    }
  }
}

TEST_CASE("USB eigenvalues decay fast and are positive descending") {
  const SpectralBasis b = build_basis(BasisKind::USB, 256, 20);
  REQUIRE(b.eigenvalues.size() == 20);
  CHECK(b.eigenvalues[19] / b.eigenvalues[0] < 1e-9);
  for (std::size_t l = 0; l < 20; ++l) {
    CHECK(b.eigenvalues[l] > 0.0);
    if (l > 0) CHECK(b.eigenvalues[l] <= b.eigenvalues[l - 1]);
  }
}

TEST_CASE("Fourier DC mode at n=8, L=1") {
  const SpectralBasis b = build_basis(BasisKind::Fourier, 8, 1);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(b.filters(i, 0) ==
          doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-14));
}

TEST_CASE("random orthogonal basis is deterministic in the seed") {
  const SpectralBasis a = build_basis(BasisKind::RandomOrthogonal, 64, 16, 7);
  const SpectralBasis b = build_basis(BasisKind::RandomOrthogonal, 64, 16, 7);
  CHECK(a.filters.a == b.filters.a);  // bitwise
  const SpectralBasis c = build_basis(BasisKind::RandomOrthogonal, 64, 16, 8);
  CHECK(a.filters.a != c.filters.a);
}

TEST_CASE("build_basis input validation") {
  CHECK_THROWS(build_basis(BasisKind::USB, 64, 65));
  CHECK_THROWS(build_basis(BasisKind::USB, 64, 0));
  CHECK_THROWS(build_basis(BasisKind::Fourier, 48, 8));
}

TEST_CASE("extend_modes arity 1 reproduces the basis columns") {
  const SpectralBasis b = build_basis(BasisKind::USB, 32, 6);
  for (IndexScheme s : {IndexScheme::Tied, IndexScheme::Multi}) {
    const ModeSet ms = extend_modes(b, 1, s);
    CHECK(ms.K == 6);
    for (std::size_t k = 0; k < 6; ++k)
      for (std::size_t i = 0; i < 32; ++i)
        CHECK(ms.filters[k][i] == b.filters(i, k));
  }
}

TEST_CASE("extend_modes counts and outer-product structure at M=2") {
  const SpectralBasis b = build_basis(BasisKind::USB, 16, 6);
  const ModeSet tied = extend_modes(b, 2, IndexScheme::Tied);
  const ModeSet multi = extend_modes(b, 2, IndexScheme::Multi);
  CHECK(tied.K == 6);
  CHECK(multi.K == 36);
  // tied mode 3 at (i, j) equals the outer product of column 3 with itself
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      CHECK(tied.filters[3][i * 16 + j] ==
            doctest::Approx(b.filters(i, 3) * b.filters(j, 3)).epsilon(1e-14));
  // multi modes enumerate tuples lexicographically: mode (1,2) is index 8
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      CHECK(multi.filters[1 * 6 + 2][i * 16 + j] ==
            doctest::Approx(b.filters(i, 1) * b.filters(j, 2)).epsilon(1e-14));
}

TEST_CASE("extend_modes multi-index budget guard") {
  const SpectralBasis b = build_basis(BasisKind::Fourier, 32, 30);
  CHECK_THROWS(extend_modes(b, 3, IndexScheme::Multi));  // 27000 > 1e4
  CHECK_THROWS(extend_modes(b, 4, IndexScheme::Tied));
}

TEST_CASE("project_truncate on a basis element and its complement") {
  const SpectralBasis b = build_basis(BasisKind::USB, 32, 8);
  const ProjectResult r1 = project_truncate(b.filter_column(0), b, 8);
  CHECK(r1.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t l = 1; l < 8; ++l)
    CHECK(std::abs(r1.coefficients[l]) <= 1e-12);
  CHECK(r1.rel_error <= 1e-10);

  // a vector orthogonal to span(Phi): project a random vector out
  Rng rng(5);
  std::vector<double> g(32);
  for (double& x : g) x = rng.next_gaussian();
  const ProjectResult full = project_truncate(g, b, 8);
  std::vector<double> orth(32);
  for (std::size_t i = 0; i < 32; ++i) orth[i] = g[i] - full.reconstruction[i];
  const ProjectResult r2 = project_truncate(orth, b, 8);
  CHECK(r2.rel_error == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("project_truncate compresses a geometric kernel profile sharply") {
  const std::vector<double> g = kernel_profile(1.0, 0.9, 256);
  const SpectralBasis b = build_basis(BasisKind::USB, 256, 20);
  CHECK(project_truncate(g, b, 20).rel_error < 1e-3);
}

TEST_CASE("project_truncate is monotone in the truncation level") {
  const std::vector<double> g = geometric_kernel(1.0, 0.8, 64);
  const SpectralBasis b = build_basis(BasisKind::Chebyshev, 64, 32);
  double prev = 2.0;
  for (std::size_t L = 1; L <= 32; ++L) {
    const double e = project_truncate(g, b, L).rel_error;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("completeness at full truncation level") {
  Rng rng(9);
  // USB/Chebyshev at small n (the Hilbert tail stays positive there),
  // Fourier/random at n=64
  for (auto [kind, n] : {std::pair<BasisKind, std::size_t>{BasisKind::USB, 8},
                         {BasisKind::Chebyshev, 8},
                         {BasisKind::Fourier, 64},
                         {BasisKind::RandomOrthogonal, 64}}) {
    std::vector<double> g(n);
    for (double& x : g) x = rng.next_gaussian();
    const SpectralBasis b = build_basis(kind, n, n, 1);
    CHECK(project_truncate(g, b, n).rel_error <= 1e-10);
  }
}

TEST_CASE("project_truncate zero input and validation") {
  const SpectralBasis b = build_basis(BasisKind::Fourier, 16, 4);
  const ProjectResult r = project_truncate(std::vector<double>(16, 0.0), b, 4);
  CHECK(r.rel_error == 0.0);
  for (double c : r.coefficients) CHECK(c == 0.0);
  CHECK_THROWS(project_truncate(std::vector<double>(8, 1.0), b, 4));
  CHECK_THROWS(project_truncate(std::vector<double>(16, 1.0), b, 5));
}
