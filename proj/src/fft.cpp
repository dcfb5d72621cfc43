#include "sfo/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "sfo/util.hpp"

namespace sfo {

namespace {

void check_pow2(std::size_t n, const char* who) {
  if (!is_power_of_two(n))
    throw std::invalid_argument(std::string(who) +
                                ": length must be a power of two");
}

}  // namespace

void fft_inplace(double* re, double* im, std::size_t n, bool inverse) {
  check_pow2(n, "fft");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }

  const double pi = 3.14159265358979323846264338327950288;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
    const double wr = std::cos(ang);
    const double wi = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t a = i + k;
        const std::size_t b = i + k + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }

  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] *= inv;
      im[i] *= inv;
    }
  }
}

ComplexBuffer fft_1d(const ComplexBuffer& x) {
  if (x.re.size() != x.im.size())
    throw std::invalid_argument("fft_1d: re/im length mismatch");
  ComplexBuffer y = x;
  fft_inplace(y.re.data(), y.im.data(), y.size(), false);
  return y;
}

ComplexBuffer ifft_1d(const ComplexBuffer& x) {
  if (x.re.size() != x.im.size())
    throw std::invalid_argument("ifft_1d: re/im length mismatch");
  ComplexBuffer y = x;
  fft_inplace(y.re.data(), y.im.data(), y.size(), true);
  return y;
}

ComplexBuffer fft_real(const std::vector<double>& x) {
  ComplexBuffer b(x.size());
  b.re = x;
  fft_inplace(b.re.data(), b.im.data(), b.size(), false);
  return b;
}

void fft_nd_inplace(std::vector<double>& re, std::vector<double>& im,
                    const std::vector<std::size_t>& shape,
                    const std::vector<std::size_t>& axes, bool inverse) {
  std::size_t total = 1;
  for (std::size_t s : shape) total *= s;
  if (re.size() != total || im.size() != total)
    throw std::invalid_argument("fft_nd: buffer/shape mismatch");

  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t a = shape.size(); a-- > 1;)
    strides[a - 1] = strides[a] * shape[a];

  for (std::size_t axis : axes) {
    if (axis >= shape.size())
      throw std::invalid_argument("fft_nd: axis out of range");
    const std::size_t n = shape[axis];
    check_pow2(n, "fft_nd");
    const std::size_t stride = strides[axis];
    const std::size_t lines = total / n;
    std::vector<double> lre(n), lim(n);
    for (std::size_t line = 0; line < lines; ++line) {
      // Decompose the line index into the non-axis coordinates.
      std::size_t base = 0, rem = line;
      for (std::size_t a = shape.size(); a-- > 0;) {
        if (a == axis) continue;
        base += (rem % shape[a]) * strides[a];
        rem /= shape[a];
      }
      for (std::size_t i = 0; i < n; ++i) {
        lre[i] = re[base + i * stride];
        lim[i] = im[base + i * stride];
      }
      fft_inplace(lre.data(), lim.data(), n, inverse);
      for (std::size_t i = 0; i < n; ++i) {
        re[base + i * stride] = lre[i];
        im[base + i * stride] = lim[i];
      }
    }
  }
}

std::vector<double> circular_convolve(const std::vector<double>& u,
                                      const std::vector<double>& k) {
  if (u.size() != k.size())
    throw std::invalid_argument("circular_convolve: length mismatch");
  const std::size_t n = u.size();
  check_pow2(n, "circular_convolve");
  ComplexBuffer fu = fft_real(u);
  ComplexBuffer fk = fft_real(k);
  ComplexBuffer prod(n);
  for (std::size_t i = 0; i < n; ++i) {
    prod.re[i] = fu.re[i] * fk.re[i] - fu.im[i] * fk.im[i];
    prod.im[i] = fu.re[i] * fk.im[i] + fu.im[i] * fk.re[i];
  }
  fft_inplace(prod.re.data(), prod.im.data(), n, true);
  return prod.re;
}

namespace ref {

std::vector<double> circular_convolve_direct(const std::vector<double>& u,
                                             const std::vector<double>& k) {
  if (u.size() != k.size())
    throw std::invalid_argument("circular_convolve_direct: length mismatch");
  const std::size_t n = u.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += k[(i + n - j) % n] * u[j];
    out[i] = s;
  }
  return out;
}

}  // namespace ref

}  // namespace sfo
