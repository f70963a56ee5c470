#include "hermflow/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hermflow/fft.hpp"

namespace hermflow {

using spectral::cplx;

namespace {

std::vector<cplx> ifft_all_c(std::vector<cplx> z, const std::vector<int>& dims) {
    for (std::size_t a = 0; a < dims.size(); ++a)
        spectral::fft_axis(z, dims, static_cast<int>(a), +1);
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    const double s = 1.0 / static_cast<double>(total);
    for (auto& v : z) v *= s;
    return z;
}

// 4th-order first derivative on a uniform non-periodic grid.
std::vector<double> fd4_d1(const std::vector<double>& u, double h) {
    const std::size_t n = u.size();
    std::vector<double> d(n);
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]);
    d[1] = c * (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = c * (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]);
    d[n - 2] = -c * (-3.0 * u[n - 1] - 10.0 * u[n - 2] + 18.0 * u[n - 3] - 6.0 * u[n - 4] + u[n - 5]);
    d[n - 1] = -c * (-25.0 * u[n - 1] + 48.0 * u[n - 2] - 36.0 * u[n - 3] + 16.0 * u[n - 4] - 3.0 * u[n - 5]);
    return d;
}

std::vector<double> fd2_d1(const std::vector<double>& u, double h, bool periodic) {
    const std::size_t n = u.size();
    std::vector<double> d(n);
    if (periodic) {
        for (std::size_t i = 0; i < n; ++i)
            d[i] = (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * h);
        return d;
    }
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    return d;
}

std::vector<double> fd2_d2(const std::vector<double>& u, double h, bool periodic) {
    const std::size_t n = u.size();
    std::vector<double> d(n);
    const double h2 = h * h;
    if (periodic) {
        for (std::size_t i = 0; i < n; ++i)
            d[i] = (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / h2;
        return d;
    }
    d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
    return d;
}

struct TorusModes {
    std::vector<int> dims;
    std::vector<std::vector<double>> omega; // per axis: angular frequency by index
    std::vector<std::vector<bool>> nyq;
};

TorusModes torus_modes(const ModelGeometry& g) {
    TorusModes m;
    m.dims = g.grid;
    m.omega.resize(m.dims.size());
    m.nyq.resize(m.dims.size());
    for (std::size_t a = 0; a < m.dims.size(); ++a) {
        const int n = m.dims[a];
        m.omega[a].resize(n);
        m.nyq[a].resize(n);
        for (int k = 0; k < n; ++k) {
            m.omega[a][k] = 2.0 * std::numbers::pi * spectral::signed_mode(k, n) / g.period;
            m.nyq[a][k] = spectral::is_nyquist(k, n);
        }
    }
    return m;
}

// Periodic shifted second differences on a torus grid, axes may coincide.
std::vector<double> torus_fd_second(const ScalarField& u, int ax1, int ax2) {
    const auto& dims = u.geo->grid;
    const std::size_t nd = dims.size();
    std::vector<std::size_t> stride(nd, 1);
    for (std::size_t a = nd; a-- > 1;) stride[a - 1] = stride[a] * static_cast<std::size_t>(dims[a]);
    const std::size_t total = u.size();
    const double h1 = u.geo->period / dims[ax1];
    const double h2 = u.geo->period / dims[ax2];
    std::vector<double> out(total);

    std::vector<int> idx(nd, 0);
    for (std::size_t m = 0; m < total; ++m) {
        auto shifted = [&](int a1s, int a2s) {
            std::size_t p = 0;
            for (std::size_t a = 0; a < nd; ++a) {
                int v = idx[a];
                if (static_cast<int>(a) == ax1) v += a1s;
                if (static_cast<int>(a) == ax2) v += a2s;
                v = ((v % dims[a]) + dims[a]) % dims[a];
                p += static_cast<std::size_t>(v) * stride[a];
            }
            return u.values[p];
        };
        if (ax1 == ax2) {
            out[m] = (shifted(1, 0) - 2.0 * u.values[m] + shifted(-1, 0)) / (h1 * h1);
        } else {
            out[m] = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4.0 * h1 * h2);
        }
        for (std::size_t a = nd; a-- > 0;) {
            if (++idx[a] < dims[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

void check_finite(const ScalarField& u, const char* where) {
    if (!u.finite()) throw NanInput(where);
}

} // namespace

std::vector<double> radial_d1(const GeometryPtr& g, const std::vector<double>& u) {
    if (g->kind == GeometryKind::Hopf) return spectral::periodic_derivative(u, g->period, 1);
    if (g->kind == GeometryKind::BlowupCalabi) return fd4_d1(u, g->radial_spacing());
    throw UnsupportedGeometry("radial_d1");
}

std::vector<double> radial_d2(const GeometryPtr& g, const std::vector<double>& u) {
    if (g->kind == GeometryKind::Hopf) return spectral::periodic_derivative(u, g->period, 2);
    if (g->kind == GeometryKind::BlowupCalabi) return fd4_d1(fd4_d1(u, g->radial_spacing()), g->radial_spacing());
    throw UnsupportedGeometry("radial_d2");
}

std::vector<double> radial_d1_fd(const GeometryPtr& g, const std::vector<double>& u) {
    return fd2_d1(u, g->radial_spacing(), g->kind == GeometryKind::Hopf);
}

std::vector<double> radial_d2_fd(const GeometryPtr& g, const std::vector<double>& u) {
    return fd2_d2(u, g->radial_spacing(), g->kind == GeometryKind::Hopf);
}

OneOneForm ddc(const ScalarField& u) {
    check_finite(u, "ddc input");
    const auto& g = *u.geo;
    OneOneForm out = OneOneForm::zero(u.geo);

    switch (g.kind) {
        case GeometryKind::Hopf:
        case GeometryKind::BlowupCalabi:
            out.comps[0] = radial_d1(u.geo, u.values);
            out.comps[1] = radial_d2(u.geo, u.values);
            return out;

        case GeometryKind::Torus1: {
            const auto modes = torus_modes(g);
            auto z = spectral::fft_all(u.values, modes.dims);
            std::size_t m = 0;
            for (int kx = 0; kx < modes.dims[0]; ++kx) {
                const double wx = modes.omega[0][kx];
                for (int ky = 0; ky < modes.dims[1]; ++ky, ++m) {
                    const double wy = modes.omega[1][ky];
                    z[m] *= -(wx * wx + wy * wy) / 4.0;
                }
            }
            out.comps[0] = spectral::ifft_all_real(std::move(z), modes.dims);
            return out;
        }

        case GeometryKind::Torus2: {
            const auto modes = torus_modes(g);
            const auto z0 = spectral::fft_all(u.values, modes.dims);
            auto z11 = z0, z22 = z0, z12 = z0;
            std::size_t m = 0;
            for (int k0 = 0; k0 < modes.dims[0]; ++k0)
                for (int k1 = 0; k1 < modes.dims[1]; ++k1)
                    for (int k2 = 0; k2 < modes.dims[2]; ++k2)
                        for (int k3 = 0; k3 < modes.dims[3]; ++k3, ++m) {
                            const double w0 = modes.omega[0][k0], w1 = modes.omega[1][k1];
                            const double w2 = modes.omega[2][k2], w3 = modes.omega[3][k3];
                            z11[m] *= -(w0 * w0 + w1 * w1) / 4.0;
                            z22[m] *= -(w2 * w2 + w3 * w3) / 4.0;
                            if (modes.nyq[0][k0] || modes.nyq[1][k1] || modes.nyq[2][k2] || modes.nyq[3][k3]) {
                                z12[m] = cplx(0.0, 0.0);
                            } else {
                                const cplx mu1(0.5 * w1, 0.5 * w0);  // (i w0 + w1)/2
                                const cplx nu2(-0.5 * w3, 0.5 * w2); // (i w2 - w3)/2
                                z12[m] *= mu1 * nu2;
                            }
                        }
            out.comps[0] = spectral::ifft_all_real(std::move(z11), modes.dims);
            out.comps[1] = spectral::ifft_all_real(std::move(z22), modes.dims);
            auto a12 = ifft_all_c(std::move(z12), modes.dims);
            for (std::size_t i = 0; i < a12.size(); ++i) {
                out.comps[2][i] = a12[i].real();
                out.comps[3][i] = a12[i].imag();
            }
            return out;
        }
    }
    throw UnsupportedGeometry("ddc");
}

OneOneForm ddc_fd(const ScalarField& u) {
    check_finite(u, "ddc_fd input");
    const auto& g = *u.geo;
    OneOneForm out = OneOneForm::zero(u.geo);

    switch (g.kind) {
        case GeometryKind::Hopf:
        case GeometryKind::BlowupCalabi:
            out.comps[0] = radial_d1_fd(u.geo, u.values);
            out.comps[1] = radial_d2_fd(u.geo, u.values);
            return out;

        case GeometryKind::Torus1: {
            const auto uxx = torus_fd_second(u, 0, 0);
            const auto uyy = torus_fd_second(u, 1, 1);
            for (std::size_t i = 0; i < u.size(); ++i)
                out.comps[0][i] = (uxx[i] + uyy[i]) / 4.0;
            return out;
        }

        case GeometryKind::Torus2: {
            const auto u00 = torus_fd_second(u, 0, 0);
            const auto u11 = torus_fd_second(u, 1, 1);
            const auto u22 = torus_fd_second(u, 2, 2);
            const auto u33 = torus_fd_second(u, 3, 3);
            const auto u02 = torus_fd_second(u, 0, 2);
            const auto u13 = torus_fd_second(u, 1, 3);
            const auto u03 = torus_fd_second(u, 0, 3);
            const auto u12 = torus_fd_second(u, 1, 2);
            for (std::size_t i = 0; i < u.size(); ++i) {
                out.comps[0][i] = (u00[i] + u11[i]) / 4.0;
                out.comps[1][i] = (u22[i] + u33[i]) / 4.0;
                out.comps[2][i] = (u02[i] + u13[i]) / 4.0;
                out.comps[3][i] = (u03[i] - u12[i]) / 4.0;
            }
            return out;
        }
    }
    throw UnsupportedGeometry("ddc_fd");
}

OneOneForm add_ddc(const OneOneForm& theta, const ScalarField& phi) {
    require_same_geometry(theta.geo, phi.geo, "add_ddc");
    return theta + ddc(phi);
}

VolumeDensity wedge_top(const std::vector<const OneOneForm*>& forms) {
    if (forms.empty()) throw WrongArity("wedge_top needs at least one form");
    const GeometryPtr g = forms[0]->geo;
    for (const auto* f : forms) require_same_geometry(g, f->geo, "wedge_top");
    const int n = g->complex_dim();
    if (static_cast<int>(forms.size()) != n)
        throw WrongArity("wedge_top needs " + std::to_string(n) + " forms, got " + std::to_string(forms.size()));

    const std::size_t nn = g->node_count();
    std::vector<double> d(nn);
    if (n == 1) {
        const auto& a = forms[0]->comps[0];
        for (std::size_t i = 0; i < nn; ++i) d[i] = 2.0 * a[i];
    } else if (g->is_radial()) {
        const auto& a = forms[0]->comps[0];
        const auto& b = forms[0]->comps[1];
        const auto& c = forms[1]->comps[0];
        const auto& e = forms[1]->comps[1];
        for (std::size_t i = 0; i < nn; ++i) d[i] = a[i] * e[i] + b[i] * c[i];
    } else {
        const auto& A = forms[0]->comps;
        const auto& B = forms[1]->comps;
        for (std::size_t i = 0; i < nn; ++i)
            d[i] = A[0][i] * B[1][i] + A[1][i] * B[0][i] - 2.0 * (A[2][i] * B[2][i] + A[3][i] * B[3][i]);
    }
    return VolumeDensity(g, std::move(d));
}

VolumeDensity wedge_top(const OneOneForm& a) { return wedge_top(std::vector<const OneOneForm*>{&a}); }

VolumeDensity wedge_top(const OneOneForm& a, const OneOneForm& b) {
    return wedge_top(std::vector<const OneOneForm*>{&a, &b});
}

VolumeDensity ma_density(const OneOneForm& omega) {
    if (omega.geo->complex_dim() == 1) return wedge_top(omega);
    return wedge_top(omega, omega);
}

double integrate(const VolumeDensity& d) {
    const auto& g = *d.geo;
    switch (g.kind) {
        case GeometryKind::Torus1:
        case GeometryKind::Torus2: {
            double sum = 0.0;
            for (double v : d.values) sum += v;
            const double mean = sum / static_cast<double>(d.values.size());
            return g.kind == GeometryKind::Torus1 ? mean : 0.5 * mean;
        }
        case GeometryKind::Hopf: {
            double sum = 0.0;
            for (double v : d.values) sum += v;
            return kRadialTransverseVolume * g.radial_spacing() * sum;
        }
        case GeometryKind::BlowupCalabi: {
            double sum = 0.5 * (d.values.front() + d.values.back());
            for (std::size_t i = 1; i + 1 < d.values.size(); ++i) sum += d.values[i];
            return kRadialTransverseVolume * g.radial_spacing() * sum;
        }
    }
    throw UnsupportedGeometry("integrate");
}

bool is_positive(const OneOneForm& omega) {
    const auto& g = *omega.geo;
    const std::size_t nn = g.node_count();
    if (g.kind == GeometryKind::Torus1) {
        for (std::size_t i = 0; i < nn; ++i)
            if (!(omega.comps[0][i] > 0.0)) return false;
        return true;
    }
    if (g.is_radial()) {
        for (std::size_t i = 0; i < nn; ++i)
            if (!(omega.comps[0][i] > 0.0 && omega.comps[1][i] > 0.0)) return false;
        return true;
    }
    for (std::size_t i = 0; i < nn; ++i) {
        const double det = omega.comps[0][i] * omega.comps[1][i] -
                           (omega.comps[2][i] * omega.comps[2][i] + omega.comps[3][i] * omega.comps[3][i]);
        if (!(omega.comps[0][i] > 0.0 && det > 0.0)) return false;
    }
    return true;
}

std::vector<double> pointwise_margin(const OneOneForm& alpha, const OneOneForm& omega_ref) {
    require_same_geometry(alpha.geo, omega_ref.geo, "positivity_margin");
    if (!is_positive(omega_ref)) throw NonPositiveForm("reference form in positivity_margin");
    const auto& g = *alpha.geo;
    const std::size_t nn = g.node_count();
    std::vector<double> m(nn);

    if (g.kind == GeometryKind::Torus1) {
        for (std::size_t i = 0; i < nn; ++i) m[i] = alpha.comps[0][i] / omega_ref.comps[0][i];
    } else if (g.is_radial()) {
        for (std::size_t i = 0; i < nn; ++i)
            m[i] = std::min(alpha.comps[0][i] / omega_ref.comps[0][i],
                            alpha.comps[1][i] / omega_ref.comps[1][i]);
    } else {
        for (std::size_t i = 0; i < nn; ++i) {
            const double a11 = alpha.comps[0][i], a22 = alpha.comps[1][i];
            const double ar = alpha.comps[2][i], ai = alpha.comps[3][i];
            const double g11 = omega_ref.comps[0][i], g22 = omega_ref.comps[1][i];
            const double gr = omega_ref.comps[2][i], gi = omega_ref.comps[3][i];
            const double detG = g11 * g22 - (gr * gr + gi * gi);
            const double detA = a11 * a22 - (ar * ar + ai * ai);
            const double s = a11 * g22 + a22 * g11 - 2.0 * (ar * gr + ai * gi);
            const double disc = std::max(s * s - 4.0 * detG * detA, 0.0);
            m[i] = (s - std::sqrt(disc)) / (2.0 * detG);
        }
    }
    return m;
}

double positivity_margin(const OneOneForm& alpha, const OneOneForm& omega_ref) {
    const auto m = pointwise_margin(alpha, omega_ref);
    return *std::min_element(m.begin(), m.end());
}

OneOneForm ricci_form(const OneOneForm& omega) {
    if (!is_positive(omega)) throw NonPositiveForm("ricci_form input");
    const auto& g = *omega.geo;
    const std::size_t nn = g.node_count();

    if (g.is_radial()) {
        std::vector<double> s(nn);
        for (std::size_t i = 0; i < nn; ++i)
            s[i] = std::log(omega.comps[0][i] * omega.comps[1][i]);
        OneOneForm ric = OneOneForm::zero(omega.geo);
        const auto s1 = radial_d1(omega.geo, s);
        const auto s2 = radial_d2(omega.geo, s);
        for (std::size_t i = 0; i < nn; ++i) {
            ric.comps[0][i] = 2.0 - s1[i];
            ric.comps[1][i] = -s2[i];
        }
        return ric;
    }

    ScalarField logdet(omega.geo);
    if (g.kind == GeometryKind::Torus1) {
        for (std::size_t i = 0; i < nn; ++i) logdet[i] = std::log(omega.comps[0][i]);
    } else {
        for (std::size_t i = 0; i < nn; ++i)
            logdet[i] = std::log(omega.comps[0][i] * omega.comps[1][i] -
                                 (omega.comps[2][i] * omega.comps[2][i] + omega.comps[3][i] * omega.comps[3][i]));
    }
    return -1.0 * ddc(logdet);
}

ScalarField trace_form(const OneOneForm& alpha, const OneOneForm& omega) {
    require_same_geometry(alpha.geo, omega.geo, "trace_form");
    if (!is_positive(omega)) throw NonPositiveForm("trace_form metric");
    const auto& g = *alpha.geo;
    const std::size_t nn = g.node_count();
    ScalarField t(alpha.geo);

    if (g.kind == GeometryKind::Torus1) {
        for (std::size_t i = 0; i < nn; ++i) t[i] = alpha.comps[0][i] / omega.comps[0][i];
    } else if (g.is_radial()) {
        for (std::size_t i = 0; i < nn; ++i)
            t[i] = alpha.comps[0][i] / omega.comps[0][i] + alpha.comps[1][i] / omega.comps[1][i];
    } else {
        for (std::size_t i = 0; i < nn; ++i) {
            const double det = omega.comps[0][i] * omega.comps[1][i] -
                               (omega.comps[2][i] * omega.comps[2][i] + omega.comps[3][i] * omega.comps[3][i]);
            t[i] = (alpha.comps[0][i] * omega.comps[1][i] + alpha.comps[1][i] * omega.comps[0][i] -
                    2.0 * (alpha.comps[2][i] * omega.comps[2][i] + alpha.comps[3][i] * omega.comps[3][i])) /
                   det;
        }
    }
    return t;
}

ScalarField scalar_curvature(const OneOneForm& omega) {
    return trace_form(ricci_form(omega), omega);
}

double restricted_volume(const OneOneForm& omega, const SubvarietyTag& tag) {
    const auto& g = *omega.geo;
    bool tracked = false;
    for (const auto& t : g.tracked) tracked = tracked || t.kind == tag.kind;
    if (!tracked) throw UntrackedSubvariety(tag.name);

    switch (tag.kind) {
        case SubvarietyKind::Whole:
            return integrate(ma_density(omega));
        case SubvarietyKind::ExceptionalCurve:
            if (g.kind != GeometryKind::BlowupCalabi) throw UntrackedSubvariety(tag.name);
            return omega.comps[0].front() * kExceptionalCurveArea;
        case SubvarietyKind::FiberClass: {
            if (g.kind != GeometryKind::Hopf) throw UntrackedSubvariety(tag.name);
            double mean = 0.0;
            for (double v : omega.comps[0]) mean += v;
            mean /= static_cast<double>(omega.comps[0].size());
            return kExceptionalCurveArea * mean;
        }
    }
    throw UntrackedSubvariety(tag.name);
}

ScalarField max_glue(const ScalarField& phi1, const ScalarField& phi2) {
    require_same_geometry(phi1.geo, phi2.geo, "max_glue");
    ScalarField out(phi1.geo);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(phi1[i], phi2[i]);
    return out;
}

std::vector<double> ddc_form_density(const OneOneForm& omega) {
    const auto& g = *omega.geo;
    const std::size_t nn = g.node_count();
    if (g.kind == GeometryKind::Torus1) return std::vector<double>(nn, 0.0);

    if (g.is_radial()) {
        const auto a2 = radial_d2(omega.geo, omega.comps[0]);
        const auto b1 = radial_d1(omega.geo, omega.comps[1]);
        std::vector<double> d(nn);
        for (std::size_t i = 0; i < nn; ++i) d[i] = a2[i] - b1[i];
        return d;
    }

    // d1 dbar1 A22 + d2 dbar2 A11 - 2 Re(d2 dbar1 A12)
    const auto modes = torus_modes(g);
    auto z22 = spectral::fft_all(omega.comps[0], modes.dims); // will carry d2 dbar2 A11
    auto z11 = spectral::fft_all(omega.comps[1], modes.dims); // will carry d1 dbar1 A22
    std::vector<cplx> z12(nn);
    for (std::size_t i = 0; i < nn; ++i) z12[i] = cplx(omega.comps[2][i], omega.comps[3][i]);
    for (std::size_t a = 0; a < modes.dims.size(); ++a)
        spectral::fft_axis(z12, modes.dims, static_cast<int>(a), -1);

    std::size_t m = 0;
    for (int k0 = 0; k0 < modes.dims[0]; ++k0)
        for (int k1 = 0; k1 < modes.dims[1]; ++k1)
            for (int k2 = 0; k2 < modes.dims[2]; ++k2)
                for (int k3 = 0; k3 < modes.dims[3]; ++k3, ++m) {
                    const double w0 = modes.omega[0][k0], w1 = modes.omega[1][k1];
                    const double w2 = modes.omega[2][k2], w3 = modes.omega[3][k3];
                    z11[m] *= -(w0 * w0 + w1 * w1) / 4.0;
                    z22[m] *= -(w2 * w2 + w3 * w3) / 4.0;
                    if (modes.nyq[0][k0] || modes.nyq[1][k1] || modes.nyq[2][k2] || modes.nyq[3][k3]) {
                        z12[m] = cplx(0.0, 0.0);
                    } else {
                        const cplx mu2(0.5 * w3, 0.5 * w2); // (i w2 + w3)/2
                        const cplx nu1(-0.5 * w1, 0.5 * w0); // (i w0 - w1)/2
                        z12[m] *= mu2 * nu1;
                    }
                }
    const auto t11 = spectral::ifft_all_real(std::move(z11), modes.dims);
    const auto t22 = spectral::ifft_all_real(std::move(z22), modes.dims);
    const auto t12 = ifft_all_c(std::move(z12), modes.dims);

    std::vector<double> d(nn);
    for (std::size_t i = 0; i < nn; ++i) d[i] = t11[i] + t22[i] - 2.0 * t12[i].real();
    return d;
}

double form_scale(const OneOneForm& omega) {
    double s = 0.0;
    for (const auto& c : omega.comps)
        for (double v : c) s = std::max(s, std::abs(v));
    return s;
}

std::vector<double> torus_axis_diff(const GeometryPtr& g, const std::vector<double>& v, int axis, int order) {
    const auto& dims = g->grid;
    const std::size_t nd = dims.size();
    std::vector<std::size_t> stride(nd, 1);
    for (std::size_t a = nd; a-- > 1;) stride[a - 1] = stride[a] * static_cast<std::size_t>(dims[a]);
    const std::size_t total = v.size();
    const double h = g->period / dims[axis];
    const int na = dims[axis];
    std::vector<double> out(total);
    std::vector<int> idx(nd, 0);
    for (std::size_t m = 0; m < total; ++m) {
        const int ia = idx[axis];
        const std::size_t up = m + stride[axis] * static_cast<std::size_t>(((ia + 1) % na) - ia);
        const std::size_t dn = m + stride[axis] * static_cast<std::size_t>(((ia - 1 + na) % na) - ia);
        out[m] = order == 1 ? (v[up] - v[dn]) / (2.0 * h) : (v[up] - 2.0 * v[m] + v[dn]) / (h * h);
        for (std::size_t a = nd; a-- > 0;) {
            if (++idx[a] < dims[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

} // namespace hermflow
