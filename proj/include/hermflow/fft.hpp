#pragma once

// Small self-contained spectral kernel: complex FFT (radix-2 with a naive DFT
// fallback for non-power-of-two lengths) plus periodic derivative helpers.

#include <complex>
#include <cstddef>
#include <vector>

namespace hermflow::spectral {

using cplx = std::complex<double>;

// In-place transform, sign = -1 forward, +1 inverse (inverse is unnormalized).
void fft_inplace(cplx* x, std::size_t n, int sign);

// Transform along one axis of a row-major multi-dimensional array.
void fft_axis(std::vector<cplx>& data, const std::vector<int>& dims, int axis, int sign);

// Full forward transform of a real array (all axes), unnormalized.
std::vector<cplx> fft_all(const std::vector<double>& in, const std::vector<int>& dims);

// Full inverse transform; divides by the total size and returns the real part.
std::vector<double> ifft_all_real(std::vector<cplx> data, const std::vector<int>& dims);

// Signed mode index for position k along an axis of length n.
inline int signed_mode(int k, int n) { return k <= n / 2 ? k : k - n; }
inline bool is_nyquist(int k, int n) { return (n % 2 == 0) && k == n / 2; }

// Spectral d^order/drho^order of a periodic grid function with period L.
// Odd orders zero the Nyquist mode, even orders keep it.
std::vector<double> periodic_derivative(const std::vector<double>& u, double L, int order);

} // namespace hermflow::spectral
