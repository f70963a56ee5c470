#include "hermflow/newton.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "hermflow/errors.hpp"
#include "hermflow/fft.hpp"
#include "hermflow/linalg.hpp"

namespace hermflow {

using spectral::cplx;

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

RadialStencils radial_stencils(int n, double h) {
    RadialStencils s;
    s.start1.resize(n);
    s.row1.resize(n);
    const double c = 1.0 / (12.0 * h);
    auto set_row = [&](int i, int start, std::initializer_list<double> coeffs) {
        s.start1[i] = start;
        s.row1[i].assign(coeffs);
        for (double& v : s.row1[i]) v *= c;
    };
    set_row(0, 0, {-25.0, 48.0, -36.0, 16.0, -3.0});
    set_row(1, 0, {-3.0, -10.0, 18.0, -6.0, 1.0});
    for (int i = 2; i <= n - 3; ++i) set_row(i, i - 2, {1.0, -8.0, 0.0, 8.0, -1.0});
    set_row(n - 2, n - 5, {-1.0, 6.0, -18.0, 10.0, 3.0});
    set_row(n - 1, n - 5, {3.0, -16.0, 36.0, -48.0, 25.0});

    s.start2.resize(n);
    s.row2.resize(n);
    for (int i = 0; i < n; ++i) {
        int lo = n, hi = -1;
        for (std::size_t p = 0; p < s.row1[i].size(); ++p) {
            const int k = s.start1[i] + static_cast<int>(p);
            lo = std::min(lo, s.start1[k]);
            hi = std::max(hi, s.start1[k] + static_cast<int>(s.row1[k].size()) - 1);
        }
        s.start2[i] = lo;
        s.row2[i].assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
        for (std::size_t p = 0; p < s.row1[i].size(); ++p) {
            const int k = s.start1[i] + static_cast<int>(p);
            const double c1 = s.row1[i][p];
            for (std::size_t q = 0; q < s.row1[k].size(); ++q)
                s.row2[i][s.start1[k] + static_cast<int>(q) - lo] += c1 * s.row1[k][q];
        }
    }
    return s;
}

bool collocation_positive(const OneOneForm& omega) {
    const auto& g = *omega.geo;
    if (g.kind != GeometryKind::BlowupCalabi) return is_positive(omega);
    const std::size_t n = g.node_count();
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (!(omega.comps[0][i] > 0.0 && omega.comps[1][i] > 0.0)) return false;
    return true;
}

void apply_radial_bc_rows(const GeometryPtr& g, const std::vector<double>& phi, std::vector<double>& r) {
    if (g->kind != GeometryKind::BlowupCalabi) return;
    const int n = g->grid[0];
    const auto st = radial_stencils(n, g->radial_spacing());
    double r0 = 0.0, r1 = 0.0;
    for (std::size_t p = 0; p < st.row1[0].size(); ++p) r0 += st.row1[0][p] * phi[st.start1[0] + p];
    for (std::size_t p = 0; p < st.row1[n - 1].size(); ++p) r1 += st.row1[n - 1][p] * phi[st.start1[n - 1] + p];
    r[0] = r0;
    r[static_cast<std::size_t>(n) - 1] = r1;
}

namespace {

std::vector<double> solve_blowup(const TraceOperator& op, const std::vector<double>& rhs, double* mu_out) {
    const auto& g = *op.omega->geo;
    const int n = g.grid[0];
    const auto st = radial_stencils(n, g.radial_spacing());
    const auto& a = op.omega->comps[0];
    const auto& b = op.omega->comps[1];

    auto row_entry = [&](int i, int j) {
        double v = 0.0;
        if (i == 0 || i == n - 1) {
            const int p = j - st.start1[i];
            if (p >= 0 && p < static_cast<int>(st.row1[i].size())) v = st.row1[i][p];
            return v;
        }
        const int p1 = j - st.start1[i];
        if (p1 >= 0 && p1 < static_cast<int>(st.row1[i].size())) v += op.ctr * st.row1[i][p1] / a[i];
        const int p2 = j - st.start2[i];
        if (p2 >= 0 && p2 < static_cast<int>(st.row2[i].size())) v += op.ctr * st.row2[i][p2] / b[i];
        if (i == j) v += op.alpha + (op.zdiag ? (*op.zdiag)[i] : 0.0);
        return v;
    };

    if (!op.bordered) {
        const int band = 8;
        BandedLU lu(n, band, band);
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j) {
                const double v = row_entry(i, j);
                if (v != 0.0) lu.at(i, j) = v;
            }
        lu.factor();
        std::vector<double> x = rhs;
        lu.solve(x);
        if (mu_out) *mu_out = 0.0;
        return x;
    }

    const int m = n + 1;
    std::vector<double> dense(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - 8), hi = std::min(n - 1, i + 8);
        for (int j = lo; j <= hi; ++j) dense[static_cast<std::size_t>(i) * m + j] = row_entry(i, j);
        if (i != 0 && i != n - 1) dense[static_cast<std::size_t>(i) * m + n] = 1.0;
    }
    for (int j = 0; j < n; ++j) dense[static_cast<std::size_t>(n) * m + j] = 1.0 / n;
    DenseLU lu(std::move(dense), m);
    std::vector<double> x(rhs);
    x.push_back(0.0);
    lu.solve(x);
    if (mu_out) *mu_out = x[n];
    x.resize(n);
    return x;
}

struct SpectralPrecond {
    std::vector<int> dims;
    std::vector<cplx> sym; // per flat mode
    bool bordered = false;
};

std::vector<double> gmres_trace(const TraceOperator& op, const std::vector<double>& rhs,
                                const SpectralPrecond& pc, const LinOp& apply, double* mu_out) {
    const std::size_t n = rhs.size();
    const std::size_t total = n + (op.bordered ? 1 : 0);

    std::vector<double> b(total, 0.0);
    std::copy(rhs.begin(), rhs.end(), b.begin());

    std::size_t count = 1;
    for (int d : pc.dims) count *= static_cast<std::size_t>(d);
    const double nn = static_cast<double>(count);

    LinOp prec = [&](const std::vector<double>& r, std::vector<double>& out) {
        std::vector<double> rf(r.begin(), r.begin() + n);
        auto z = spectral::fft_all(rf, pc.dims);
        double mu = 0.0;
        if (op.bordered) {
            const double s = r[n];
            const cplx r0 = z[0];
            z[0] = cplx(nn * s, 0.0);
            mu = (r0 - pc.sym[0] * z[0]).real() / nn;
        } else {
            z[0] = std::abs(pc.sym[0]) > 1e-300 ? z[0] / pc.sym[0] : cplx(0.0, 0.0);
        }
        for (std::size_t k = 1; k < z.size(); ++k)
            z[k] = std::abs(pc.sym[k]) > 1e-300 ? z[k] / pc.sym[k] : cplx(0.0, 0.0);
        auto d = spectral::ifft_all_real(std::move(z), pc.dims);
        out.assign(total, 0.0);
        std::copy(d.begin(), d.end(), out.begin());
        if (op.bordered) out[n] = mu;
    };

    std::vector<double> x(total, 0.0);
    auto res = gmres(apply, prec, b, x, 60, 800, 1e-12);
    if (!res.converged && res.relres > 1e-6)
        throw SolverFailure("trace-system GMRES stalled, relres " + std::to_string(res.relres));
    if (mu_out) *mu_out = op.bordered ? x[n] : 0.0;
    x.resize(n);
    return x;
}

std::vector<double> solve_hopf(const TraceOperator& op, const std::vector<double>& rhs, double* mu_out) {
    const auto g = op.omega->geo;
    const int n = g->grid[0];
    const auto& a = op.omega->comps[0];
    const auto& b = op.omega->comps[1];

    double ia = 0.0, ib = 0.0, mz = 0.0;
    for (int i = 0; i < n; ++i) {
        ia += 1.0 / a[i];
        ib += 1.0 / b[i];
        if (op.zdiag) mz += (*op.zdiag)[i];
    }
    ia /= n;
    ib /= n;
    mz /= n;

    SpectralPrecond pc;
    pc.dims = {n};
    pc.bordered = op.bordered;
    pc.sym.resize(n);
    for (int k = 0; k < n; ++k) {
        const double w = 2.0 * std::numbers::pi * spectral::signed_mode(k, n) / g->period;
        cplx d1 = spectral::is_nyquist(k, n) ? cplx(0.0, 0.0) : cplx(0.0, w);
        pc.sym[k] = cplx(op.alpha + mz, 0.0) + op.ctr * (ia * d1 + cplx(-ib * w * w, 0.0));
    }

    LinOp apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        std::vector<double> d(v.begin(), v.begin() + n);
        const auto d1 = spectral::periodic_derivative(d, g->period, 1);
        const auto d2 = spectral::periodic_derivative(d, g->period, 2);
        out.assign(v.size(), 0.0);
        const double mu = op.bordered ? v[n] : 0.0;
        for (int i = 0; i < n; ++i) {
            out[i] = op.alpha * d[i] + op.ctr * (d1[i] / a[i] + d2[i] / b[i]) + mu;
            if (op.zdiag) out[i] += (*op.zdiag)[i] * d[i];
        }
        if (op.bordered) out[n] = mean_of(d);
    };

    return gmres_trace(op, rhs, pc, apply, mu_out);
}

// Torus1 with a zeroth-order term: row-scaling by the metric coefficient
// makes the operator symmetric definite,
//   A(x) L(delta) = ctr * Lap(delta)/4 + (alpha + z(x)) A(x) delta,
// solved by preconditioned CG with the constant-coefficient inverse.
std::vector<double> solve_torus1_symmetric(const TraceOperator& op, const std::vector<double>& rhs) {
    const auto g = op.omega->geo;
    const std::size_t nn = g->node_count();
    const auto& A = op.omega->comps[0];

    std::vector<double> q(nn), b(nn);
    double sign = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
        q[i] = (op.alpha + (op.zdiag ? (*op.zdiag)[i] : 0.0)) * A[i];
        b[i] = rhs[i] * A[i];
    }
    // orient so the operator is positive definite
    sign = (op.ctr > 0.0 ? q[0] < 0.0 : q[0] > 0.0) ? -1.0 : 1.0;
    // S(delta) = sign * (ctr Lap(delta)/4 + q delta)
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        ScalarField d(g);
        std::copy(v.begin(), v.end(), d.values.begin());
        const OneOneForm dd = ddc(d);
        out.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) out[i] = sign * (op.ctr * dd.comps[0][i] + q[i] * v[i]);
    };

    const double qbar = mean_of(q);
    const double twopi = 2.0 * std::numbers::pi;
    std::vector<double> sym(nn);
    {
        std::size_t m = 0;
        for (int kx = 0; kx < g->grid[0]; ++kx)
            for (int ky = 0; ky < g->grid[1]; ++ky, ++m) {
                const double wx = twopi * spectral::signed_mode(kx, g->grid[0]);
                const double wy = twopi * spectral::signed_mode(ky, g->grid[1]);
                sym[m] = sign * (op.ctr * -(wx * wx + wy * wy) / 4.0 + qbar);
            }
    }
    auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
        auto z = spectral::fft_all(v, g->grid);
        for (std::size_t k = 0; k < nn; ++k)
            z[k] = std::abs(sym[k]) > 1e-300 ? z[k] / sym[k] : cplx(0.0, 0.0);
        out = spectral::ifft_all_real(std::move(z), g->grid);
    };

    std::vector<double> x(nn, 0.0), r(nn), z(nn), p(nn), Ap(nn);
    for (std::size_t i = 0; i < nn; ++i) r[i] = sign * b[i];
    double bnorm = 0.0;
    for (double v : r) bnorm += v * v;
    bnorm = std::sqrt(std::max(bnorm, 1e-300));
    precond(r, z);
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < nn; ++i) rz += r[i] * z[i];
    for (int it = 0; it < 2000; ++it) {
        double rn = 0.0;
        for (double v : r) rn += v * v;
        if (std::sqrt(rn) <= 1e-13 * bnorm) return x;
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < nn; ++i) pAp += p[i] * Ap[i];
        if (!(std::abs(pAp) > 0.0)) break;
        const double alpha_cg = rz / pAp;
        for (std::size_t i = 0; i < nn; ++i) {
            x[i] += alpha_cg * p[i];
            r[i] -= alpha_cg * Ap[i];
        }
        precond(r, z);
        double rz_new = 0.0;
        for (std::size_t i = 0; i < nn; ++i) rz_new += r[i] * z[i];
        const double beta_cg = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < nn; ++i) p[i] = z[i] + beta_cg * p[i];
    }
    // fall through with the best iterate; the caller's line search guards it
    return x;
}

std::vector<double> solve_torus(const TraceOperator& op, const std::vector<double>& rhs, double* mu_out) {
    const auto g = op.omega->geo;
    const std::size_t nn = g->node_count();
    const bool dim1 = g->kind == GeometryKind::Torus1;

    if (dim1 && !op.bordered && (op.zdiag || op.alpha != 0.0)) {
        if (mu_out) *mu_out = 0.0;
        return solve_torus1_symmetric(op, rhs);
    }

    // mean metric for the preconditioner symbol
    double g11 = mean_of(op.omega->comps[0]);
    double g22 = dim1 ? 0.0 : mean_of(op.omega->comps[1]);
    double gr = dim1 ? 0.0 : mean_of(op.omega->comps[2]);
    double gi = dim1 ? 0.0 : mean_of(op.omega->comps[3]);
    double mz = 0.0;
    if (op.zdiag) mz = mean_of(*op.zdiag);

    SpectralPrecond pc;
    pc.dims = g->grid;
    pc.bordered = op.bordered;
    pc.sym.resize(nn);
    const double twopi = 2.0 * std::numbers::pi;
    if (dim1) {
        std::size_t m = 0;
        for (int kx = 0; kx < pc.dims[0]; ++kx)
            for (int ky = 0; ky < pc.dims[1]; ++ky, ++m) {
                const double w0 = twopi * spectral::signed_mode(kx, pc.dims[0]);
                const double w1 = twopi * spectral::signed_mode(ky, pc.dims[1]);
                const double h = -(w0 * w0 + w1 * w1) / 4.0;
                pc.sym[m] = cplx(op.alpha + mz + op.ctr * h / g11, 0.0);
            }
    } else {
        const double detG = g11 * g22 - (gr * gr + gi * gi);
        std::size_t m = 0;
        for (int k0 = 0; k0 < pc.dims[0]; ++k0)
            for (int k1 = 0; k1 < pc.dims[1]; ++k1)
                for (int k2 = 0; k2 < pc.dims[2]; ++k2)
                    for (int k3 = 0; k3 < pc.dims[3]; ++k3, ++m) {
                        const double w0 = twopi * spectral::signed_mode(k0, pc.dims[0]);
                        const double w1 = twopi * spectral::signed_mode(k1, pc.dims[1]);
                        const double w2 = twopi * spectral::signed_mode(k2, pc.dims[2]);
                        const double w3 = twopi * spectral::signed_mode(k3, pc.dims[3]);
                        const double h11 = -(w0 * w0 + w1 * w1) / 4.0;
                        const double h22 = -(w2 * w2 + w3 * w3) / 4.0;
                        double cross = 0.0;
                        const bool ny = spectral::is_nyquist(k0, pc.dims[0]) || spectral::is_nyquist(k1, pc.dims[1]) ||
                                        spectral::is_nyquist(k2, pc.dims[2]) || spectral::is_nyquist(k3, pc.dims[3]);
                        if (!ny) {
                            const cplx h12(-(w0 * w2 + w1 * w3) / 4.0, (w1 * w2 - w0 * w3) / 4.0);
                            cross = 2.0 * (gr * h12.real() + gi * h12.imag());
                        }
                        const double tr = (g22 * h11 + g11 * h22 - cross) / detG;
                        pc.sym[m] = cplx(op.alpha + mz + op.ctr * tr, 0.0);
                    }
    }

    LinOp apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        ScalarField d(g);
        std::copy(v.begin(), v.begin() + nn, d.values.begin());
        const OneOneForm dd = ddc(d);
        const ScalarField tr = trace_form(dd, *op.omega);
        out.assign(v.size(), 0.0);
        const double mu = op.bordered ? v[nn] : 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            out[i] = op.alpha * d[i] + op.ctr * tr[i] + mu;
            if (op.zdiag) out[i] += (*op.zdiag)[i] * d[i];
        }
        if (op.bordered) out[nn] = mean_of(d.values);
    };

    return gmres_trace(op, rhs, pc, apply, mu_out);
}

} // namespace

std::vector<double> solve_trace_system(const TraceOperator& op, const std::vector<double>& rhs, double* mu_out) {
    switch (op.omega->geo->kind) {
        case GeometryKind::BlowupCalabi: return solve_blowup(op, rhs, mu_out);
        case GeometryKind::Hopf: return solve_hopf(op, rhs, mu_out);
        default: return solve_torus(op, rhs, mu_out);
    }
}

} // namespace hermflow
