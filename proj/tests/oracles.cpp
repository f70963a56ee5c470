#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hermflow/errors.hpp"
#include "hermflow/fft.hpp"
#include "hermflow/linalg.hpp"

namespace hermflow::oracle {

namespace {

using cplx = std::complex<double>;

struct C2Point {
    double x1, y1, x2, y2;
};

// |z|^2 and the raw coordinate matrices of ddc(rho) and drho^dc(rho):
//   A_jk = (delta_jk |z|^2 - conj(z_j) z_k) / |z|^4,  B_jk = conj(z_j) z_k / |z|^4.
struct FrameMatrices {
    cplx A[2][2], B[2][2];
    double rho;
};

FrameMatrices frame_at(const C2Point& p) {
    const cplx z1(p.x1, p.y1), z2(p.x2, p.y2);
    const cplx z[2] = {z1, z2};
    const double n2 = std::norm(z1) + std::norm(z2);
    FrameMatrices m;
    m.rho = std::log(n2);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            const cplx zb_z = std::conj(z[j]) * z[k];
            m.B[j][k] = zb_z / (n2 * n2);
            m.A[j][k] = ((j == k ? n2 : 0.0) - zb_z) / (n2 * n2);
        }
    return m;
}

double uniform_s3_annulus(std::mt19937_64& rng, C2Point& p) {
    // uniform in the R^4 annulus 1 <= |z| <= 2: direction uniform on S^3,
    // radius density ~ r^3
    std::normal_distribution<double> N(0.0, 1.0);
    double v[4];
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (double& c : v) {
            c = N(rng);
            n2 += c * c;
        }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double r = std::pow(1.0 + 15.0 * U(rng), 0.25); // r^4 uniform on [1, 16]
    p = {v[0] * inv * r, v[1] * inv * r, v[2] * inv * r, v[3] * inv * r};
    return r;
}

} // namespace

double mc_transverse_volume(std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        C2Point p{};
        uniform_s3_annulus(rng, p);
        const auto m = frame_at(p);
        // wedge coefficient of A ^ B against (i dz1 dzb1)(i dz2 dzb2)
        const cplx cross = m.A[0][1] * m.B[1][0] + m.A[1][0] * m.B[0][1];
        const double c = (m.A[0][0] * m.B[1][1] + m.A[1][1] * m.B[0][0]).real() - cross.real();
        acc += c;
    }
    const double vol_r4 = 0.5 * std::numbers::pi * std::numbers::pi * 15.0; // annulus volume in R^4
    const double integral = (acc / static_cast<double>(samples)) * 4.0 * vol_r4;
    const double L = 2.0 * std::log(2.0);
    return integral / L;
}

double mc_exceptional_area(std::size_t samples, std::uint64_t seed) {
    // int_{P^1} ddc rho = int_C 2 dA / (1+|w|^2)^2 = 2 * int_{|w|<=1} by the
    // w -> 1/w symmetry
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double r2 = U(rng); // |w|^2 is uniform under uniform disk sampling
        acc += 2.0 / ((1.0 + r2) * (1.0 + r2));
    }
    return 2.0 * std::numbers::pi * (acc / static_cast<double>(samples));
}

namespace {

double poly(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

std::vector<double> poly_deriv(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    if (d.empty()) d.push_back(0.0);
    return d;
}

} // namespace

double mc_radial_ddc_form_residual(const std::vector<double>& ac, const std::vector<double>& bc,
                                   std::size_t samples, std::uint64_t seed) {
    // eta_jk(z) = a(rho) A_jk(z) + b(rho) B_jk(z); compare the finite-difference
    // (2,2)-coefficient d1 db1 eta22 + d2 db2 eta11 - d1 db2 eta21 - d2 db1 eta12
    // with (a'' - b') e^{-2 rho}.
    std::mt19937_64 rng(seed);
    const auto a1 = poly_deriv(ac), a2 = poly_deriv(a1), b1 = poly_deriv(bc);

    auto eta = [&](const C2Point& p, int j, int k) -> cplx {
        const auto m = frame_at(p);
        return poly(ac, m.rho) * m.A[j][k] + poly(bc, m.rho) * m.B[j][k];
    };

    const double h = 1e-3;
    auto shift = [](C2Point p, int axis, double d) {
        (axis == 0 ? p.x1 : axis == 1 ? p.y1 : axis == 2 ? p.x2 : p.y2) += d;
        return p;
    };
    // complex second derivative d_{z_l} d_{zbar_m} of eta_jk via real stencils
    auto dd = [&](const C2Point& p, int l, int m, int j, int k) -> cplx {
        const int xl = 2 * l, yl = 2 * l + 1, xm = 2 * m, ym = 2 * m + 1;
        auto second = [&](int a, int b) -> cplx {
            if (a == b)
                return (eta(shift(p, a, h), j, k) - 2.0 * eta(p, j, k) + eta(shift(p, a, -h), j, k)) / (h * h);
            return (eta(shift(shift(p, a, h), b, h), j, k) - eta(shift(shift(p, a, h), b, -h), j, k) -
                    eta(shift(shift(p, a, -h), b, h), j, k) + eta(shift(shift(p, a, -h), b, -h), j, k)) /
                   (4.0 * h * h);
        };
        const cplx i(0.0, 1.0);
        return 0.25 * (second(xl, xm) + i * second(xl, ym) - i * second(yl, xm) + second(yl, ym));
    };

    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        C2Point p{};
        uniform_s3_annulus(rng, p);
        const auto m = frame_at(p);
        const cplx D = dd(p, 0, 0, 1, 1) + dd(p, 1, 1, 0, 0) - dd(p, 0, 1, 1, 0) - dd(p, 1, 0, 0, 1);
        const double want = (poly(a2, m.rho) - poly(b1, m.rho)) * std::exp(-2.0 * m.rho);
        worst = std::max(worst, std::abs(D.real() - want) + std::abs(D.imag()));
    }
    return worst;
}

ScalarField poisson_torus1(const ScalarField& g) {
    const auto& geo = *g.geo;
    if (geo.kind != GeometryKind::Torus1) throw UnsupportedGeometry("poisson_torus1");
    auto z = spectral::fft_all(g.values, geo.grid);
    const double twopi = 2.0 * std::numbers::pi;
    std::size_t m = 0;
    for (int kx = 0; kx < geo.grid[0]; ++kx)
        for (int ky = 0; ky < geo.grid[1]; ++ky, ++m) {
            const double wx = twopi * spectral::signed_mode(kx, geo.grid[0]);
            const double wy = twopi * spectral::signed_mode(ky, geo.grid[1]);
            const double w2 = wx * wx + wy * wy;
            z[m] = w2 > 0.0 ? -z[m] / w2 : 0.0;
        }
    return ScalarField(g.geo, spectral::ifft_all_real(std::move(z), geo.grid));
}

std::vector<double> envelope_policy_iteration(const std::vector<double>& theta_dens,
                                              const std::vector<double>& f, double period,
                                              std::vector<char> active, int max_iters) {
    const int n = static_cast<int>(f.size());
    const double h = period / n;
    const double c = 1.0 / (2.0 * h * h); // (phi'' / 2) coefficient

    std::vector<double> phi(f);
    for (int it = 0; it < max_iters; ++it) {
        bool any_active = false;
        for (char a : active) any_active = any_active || a;
        if (!any_active) active[0] = 1;

        std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0), rhs(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (active[i]) {
                mat[static_cast<std::size_t>(i) * n + i] = 1.0;
                rhs[i] = f[i];
            } else {
                mat[static_cast<std::size_t>(i) * n + i] = -2.0 * c;
                mat[static_cast<std::size_t>(i) * n + (i + 1) % n] = c;
                mat[static_cast<std::size_t>(i) * n + (i + n - 1) % n] = c;
                rhs[i] = -theta_dens[i];
            }
        }
        DenseLU lu(std::move(mat), n);
        lu.solve(rhs);
        phi = rhs;

        std::vector<char> next(n, 0);
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const double dens = theta_dens[i] + c * (phi[(i + 1) % n] - 2.0 * phi[i] + phi[(i + n - 1) % n]);
            if (active[i])
                next[i] = dens >= -1e-13 ? 1 : 0;
            else
                next[i] = phi[i] > f[i] + 1e-13 ? 1 : 0;
            changed = changed || next[i] != active[i];
        }
        if (!changed) break;
        active = std::move(next);
    }
    return phi;
}

} // namespace hermflow::oracle
