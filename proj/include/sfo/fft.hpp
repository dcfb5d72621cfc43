#pragma once

#include <cstddef>
#include <vector>

namespace sfo {

// Split-layout complex buffer.
struct ComplexBuffer {
  std::vector<double> re;
  std::vector<double> im;

  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  std::size_t size() const { return re.size(); }
};

// In-place radix-2 transforms; length must be a power of two.
// The inverse applies the 1/n normalization.
void fft_inplace(double* re, double* im, std::size_t n, bool inverse);

ComplexBuffer fft_1d(const ComplexBuffer& x);
ComplexBuffer ifft_1d(const ComplexBuffer& x);

ComplexBuffer fft_real(const std::vector<double>& x);

// Transform along the listed axes of a row-major multi-axis array.
void fft_nd_inplace(std::vector<double>& re, std::vector<double>& im,
                    const std::vector<std::size_t>& shape,
                    const std::vector<std::size_t>& axes, bool inverse);

// Circular convolution of equal-length real vectors via the FFT path:
// out[i] = sum_j k[(i-j) mod n] u[j].
std::vector<double> circular_convolve(const std::vector<double>& u,
                                      const std::vector<double>& k);

namespace ref {
// Direct O(n^2) sum; the serial oracle for the FFT path.
std::vector<double> circular_convolve_direct(const std::vector<double>& u,
                                             const std::vector<double>& k);
}  // namespace ref

}  // namespace sfo
