#include "hermflow/fft.hpp"

#include <cmath>
#include <numbers>

namespace hermflow::spectral {

static bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

static void fft_radix2(cplx* x, std::size_t n, int sign) {
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = x[i + j];
                const cplx v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

static void dft_naive(cplx* x, std::size_t n, int sign) {
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    const double base = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = base * static_cast<double>((k * j) % n);
            acc += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) x[k] = out[k];
}

void fft_inplace(cplx* x, std::size_t n, int sign) {
    if (n <= 1) return;
    if (is_pow2(n))
        fft_radix2(x, n, sign);
    else
        dft_naive(x, n, sign);
}

void fft_axis(std::vector<cplx>& data, const std::vector<int>& dims, int axis, int sign) {
    const std::size_t n = static_cast<std::size_t>(dims[axis]);
    std::size_t inner = 1, outer = 1;
    for (std::size_t d = axis + 1; d < dims.size(); ++d) inner *= dims[d];
    for (int d = 0; d < axis; ++d) outer *= dims[d];

    std::vector<cplx> line(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * inner * n + i;
            for (std::size_t j = 0; j < n; ++j) line[j] = data[base + j * inner];
            fft_inplace(line.data(), n, sign);
            for (std::size_t j = 0; j < n; ++j) data[base + j * inner] = line[j];
        }
    }
}

std::vector<cplx> fft_all(const std::vector<double>& in, const std::vector<int>& dims) {
    std::vector<cplx> data(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) data[i] = cplx(in[i], 0.0);
    for (std::size_t a = 0; a < dims.size(); ++a) fft_axis(data, dims, static_cast<int>(a), -1);
    return data;
}

std::vector<double> ifft_all_real(std::vector<cplx> data, const std::vector<int>& dims) {
    for (std::size_t a = 0; a < dims.size(); ++a) fft_axis(data, dims, static_cast<int>(a), +1);
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    std::vector<double> out(data.size());
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real() * scale;
    return out;
}

std::vector<double> periodic_derivative(const std::vector<double>& u, double L, int order) {
    const int n = static_cast<int>(u.size());
    std::vector<int> dims = {n};
    auto z = fft_all(u, dims);
    for (int k = 0; k < n; ++k) {
        if ((order % 2 == 1) && is_nyquist(k, n)) {
            z[k] = cplx(0.0, 0.0);
            continue;
        }
        const double w = 2.0 * std::numbers::pi * signed_mode(k, n) / L;
        cplx m(1.0, 0.0);
        const cplx iw(0.0, w);
        for (int p = 0; p < order; ++p) m *= iw;
        z[k] *= m;
    }
    return ifft_all_real(std::move(z), dims);
}

} // namespace hermflow::spectral
