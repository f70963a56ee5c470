#include "hermflow/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hermflow/errors.hpp"
#include "hermflow/fft.hpp"
#include "hermflow/linalg.hpp"
#include "hermflow/newton.hpp"

namespace hermflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Band-limited random basis respecting the admissibility structure of each
// geometry: periodic Fourier modes below the dealiasing threshold on tori and
// Hopf, Neumann cosines on BlowupCalabi (phi'(+-R) = 0 exactly).
struct SampleBasis {
    GeometryPtr geo;
    std::vector<std::vector<double>> modes; // basis fields
};

SampleBasis make_basis(const GeometryPtr& g, std::mt19937_64& rng, int n_modes) {
    SampleBasis basis;
    basis.geo = g;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::size_t nn = g->node_count();

    auto push_torus_mode = [&](const std::vector<int>& k, double phase, double amp) {
        std::vector<double> v(nn);
        const auto& dims = g->grid;
        std::vector<int> idx(dims.size(), 0);
        for (std::size_t m = 0; m < nn; ++m) {
            double arg = phase;
            for (std::size_t a = 0; a < dims.size(); ++a)
                arg += kTwoPi * k[a] * static_cast<double>(idx[a]) / dims[a];
            v[m] = amp * std::cos(arg);
            for (std::size_t a = dims.size(); a-- > 0;) {
                if (++idx[a] < dims[a]) break;
                idx[a] = 0;
            }
        }
        basis.modes.push_back(std::move(v));
    };

    for (int m = 0; m < n_modes; ++m) {
        if (g->is_radial()) {
            std::vector<double> v(nn);
            if (g->kind == GeometryKind::Hopf) {
                const int kmax = std::max(1, g->grid[0] / 4);
                const int k = 1 + static_cast<int>(U(rng) * std::min(kmax, 6));
                const double phase = kTwoPi * U(rng);
                for (std::size_t i = 0; i < nn; ++i)
                    v[i] = std::cos(kTwoPi * k * g->rho(i) / g->period + phase) / (1.0 + k * k);
            } else {
                const int k = 1 + static_cast<int>(U(rng) * 6);
                const double span = g->rho_max - g->rho_min;
                for (std::size_t i = 0; i < nn; ++i)
                    v[i] = std::cos(k * std::numbers::pi * (g->rho(i) - g->rho_min) / span) / (1.0 + k * k);
            }
            basis.modes.push_back(std::move(v));
        } else {
            std::vector<int> k(g->grid.size(), 0);
            bool nonzero = false;
            for (std::size_t a = 0; a < k.size(); ++a) {
                const int kmax = std::max(1, g->grid[a] / 4);
                k[a] = static_cast<int>(U(rng) * std::min(kmax + 1, 4));
                if (U(rng) < 0.5) k[a] = -k[a];
                nonzero = nonzero || k[a] != 0;
            }
            if (!nonzero) k[0] = 1;
            double k2 = 0.0;
            for (int kk : k) k2 += kk * kk;
            push_torus_mode(k, kTwoPi * U(rng), 1.0 / (1.0 + k2));
        }
    }
    return basis;
}

ScalarField assemble(const SampleBasis& basis, const std::vector<double>& coeff) {
    ScalarField phi(basis.geo, 0.0);
    for (std::size_t m = 0; m < basis.modes.size(); ++m)
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += coeff[m] * basis.modes[m][i];
    return phi;
}

double margin_of(const OneOneForm& theta, const ScalarField& phi, const OneOneForm& omega_ref) {
    return positivity_margin(add_ddc(theta, phi), omega_ref);
}

// Largest scale gamma with margin(theta + gamma ddc phi) above the floor.
double admissible_scale(const OneOneForm& theta, const ScalarField& phi, const OneOneForm& omega_ref,
                        double floor_margin) {
    double lo = 0.0, hi = 1.0;
    while (hi < 1e4 && margin_of(theta, hi * phi, omega_ref) > floor_margin) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (margin_of(theta, mid * phi, omega_ref) > floor_margin ? lo : hi) = mid;
    }
    return lo;
}

} // namespace

double ma_volume(const OneOneForm& theta, const ScalarField& phi) {
    require_same_geometry(theta.geo, phi.geo, "ma_volume");
    const OneOneForm omega = add_ddc(theta, phi);
    const double m = positivity_margin(omega, reference_metric(theta.geo));
    if (m < -1e-8) throw NonPositiveForm("ma_volume: margin " + std::to_string(m));
    return integrate(ma_density(omega));
}

ScalarField sample_admissible_potential(const OneOneForm& theta, const OneOneForm& omega_ref,
                                        std::uint64_t seed, const SamplerConfig& cfg) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double base = positivity_margin(theta, omega_ref);
    if (base <= 0.0) throw NonPositiveForm("sampler: theta has no margin");
    const double floor = cfg.margin_frac * base;

    const auto basis = make_basis(theta.geo, rng, cfg.modes);
    std::vector<double> coeff(basis.modes.size());
    for (auto& c : coeff) c = 2.0 * U(rng) - 1.0;
    const ScalarField phi = assemble(basis, coeff);
    const double gamma = admissible_scale(theta, phi, omega_ref, floor) * (0.3 + 0.65 * U(rng));
    return gamma * phi;
}

VolumeReport estimate_v_bounds(const OneOneForm& theta, const OneOneForm& omega_ref,
                               const SamplerConfig& cfg) {
    VolumeReport rep;
    const double base = positivity_margin(theta, omega_ref);
    if (base <= 0.0) throw NonPositiveForm("estimate_v_bounds: no admissible sample");
    const double floor = cfg.margin_frac * base;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    double vmin = 1e300, vmax = -1e300;
    std::vector<double> best_min_coeff, best_max_coeff;
    SampleBasis best_min_basis, best_max_basis;

    for (int s = 0; s < cfg.n_samples; ++s) {
        const auto basis = make_basis(theta.geo, rng, cfg.modes);
        std::vector<double> coeff(basis.modes.size());
        for (auto& c : coeff) c = 2.0 * U(rng) - 1.0;
        ScalarField phi = assemble(basis, coeff);
        const double gamma = admissible_scale(theta, phi, omega_ref, floor) * (0.3 + 0.65 * U(rng));
        for (auto& c : coeff) c *= gamma;
        phi = assemble(basis, coeff);
        const double v = integrate(ma_density(add_ddc(theta, phi)));
        rep.sample_volumes.push_back(v);
        if (v < vmin) {
            vmin = v;
            best_min_coeff = coeff;
            best_min_basis = basis;
        }
        if (v > vmax) {
            vmax = v;
            best_max_coeff = coeff;
            best_max_basis = basis;
        }
    }
    rep.n_samples = cfg.n_samples;

    // local refinement in coefficient space with a margin safeguard
    auto refine = [&](SampleBasis basis, std::vector<double> coeff, double sign, double start) {
        double value = start;
        double step = 0.1;
        int trace_id = 0;
        rep.optimizer_trace.emplace_back(trace_id++, value);
        for (int it = 0; it < cfg.refine_iters && step > 1e-6; ++it) {
            std::vector<double> grad(coeff.size(), 0.0);
            const double fd = 1e-5;
            for (std::size_t m = 0; m < coeff.size(); ++m) {
                auto cp = coeff;
                cp[m] += fd;
                const ScalarField pp = assemble(basis, cp);
                cp[m] -= 2.0 * fd;
                const ScalarField pm = assemble(basis, cp);
                grad[m] = (integrate(ma_density(add_ddc(theta, pp))) -
                           integrate(ma_density(add_ddc(theta, pm)))) /
                          (2.0 * fd);
            }
            double gn = 0.0;
            for (double gv : grad) gn = std::max(gn, std::abs(gv));
            if (gn < 1e-14) break;
            auto trial = coeff;
            for (std::size_t m = 0; m < coeff.size(); ++m) trial[m] += sign * step * grad[m] / gn;
            const ScalarField pt = assemble(basis, trial);
            if (margin_of(theta, pt, omega_ref) > 0.5 * floor) {
                const double vt = integrate(ma_density(add_ddc(theta, pt)));
                if (sign * (vt - value) > 0.0) {
                    coeff = std::move(trial);
                    value = vt;
                    rep.optimizer_trace.emplace_back(trace_id++, value);
                    continue;
                }
            }
            step *= 0.5;
        }
        return value;
    };

    rep.v_plus_lower = refine(best_max_basis, best_max_coeff, +1.0, vmax);
    rep.v_minus_upper = refine(best_min_basis, best_min_coeff, -1.0, vmin);
    return rep;
}

VHatReport v_hat_minus(const OneOneForm& theta, const OneOneForm& omega_ref,
                       const std::vector<double>& eps_ladder, const SamplerConfig& cfg) {
    if (eps_ladder.empty()) throw ConfigError("v_hat_minus: empty ladder");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] < eps_ladder[i - 1])) throw NonMonotoneLadder("epsilon ladder must decrease");

    VHatReport out;
    std::vector<double> xs, ys;
    for (double eps : eps_ladder) {
        const OneOneForm form = (1.0 - eps) * theta + eps * omega_ref;
        const auto rep = estimate_v_bounds(form, omega_ref, cfg);
        out.epsilon_ladder.emplace_back(eps, rep.v_minus_upper);
        xs.push_back(eps);
        ys.push_back(rep.v_minus_upper);
    }
    out.extrapolated = linear_fit(xs, ys).intercept;
    return out;
}

GuanLiResult guan_li_check(const OneOneForm& omega) {
    GuanLiResult out;
    const auto dens = ddc_form_density(omega);
    out.residual = sup_norm(dens);
    out.pass = out.residual <= 1e-8;
    return out;
}

ScalarField gauduchon_factor(const OneOneForm& omega) {
    const GeometryPtr g = omega.geo;
    if (!g->is_radial()) return ScalarField(g, 0.0);

    const int n = g->grid[0];
    const auto& a = omega.comps[0];
    const auto& b = omega.comps[1];

    std::vector<double> u(n, 1.0);
    if (g->kind == GeometryKind::Hopf) {
        // circulant rows of the spectral derivatives
        std::vector<double> e(n, 0.0);
        e[0] = 1.0;
        const auto d1col = spectral::periodic_derivative(e, g->period, 1);
        const auto d2col = spectral::periodic_derivative(e, g->period, 2);
        // (D u)_i = sum_j D[(i-j) mod n] u_j for column response D
        std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int k = ((i - j) % n + n) % n;
                dense[static_cast<std::size_t>(i) * n + j] = d2col[k] * a[j] - d1col[k] * b[j];
            }
        for (int j = 0; j < n; ++j) dense[j] = j == 0 ? 1.0 : 0.0; // scale row
        std::vector<double> rhs(n, 0.0);
        rhs[0] = 1.0;
        DenseLU lu(std::move(dense), n);
        lu.solve(rhs);
        u = std::move(rhs);
    } else {
        const auto st = radial_stencils(n, g->radial_spacing());
        const int band = 8;
        BandedLU lu(n, band, band);
        // row 0: u(0) = 1;  row 1: u'(-R) = 0;  rows 2..n-1: (u a)'' - (u b)' = 0
        lu.at(0, 0) = 1.0;
        for (std::size_t p = 0; p < st.row1[0].size(); ++p)
            lu.at(1, st.start1[0] + static_cast<int>(p)) = st.row1[0][p];
        for (int i = 2; i < n; ++i) {
            for (std::size_t p = 0; p < st.row2[i].size(); ++p) {
                const int j = st.start2[i] + static_cast<int>(p);
                lu.at(i, j) += st.row2[i][p] * a[j];
            }
            for (std::size_t p = 0; p < st.row1[i].size(); ++p) {
                const int j = st.start1[i] + static_cast<int>(p);
                lu.at(i, j) -= st.row1[i][p] * b[j];
            }
        }
        lu.factor();
        std::vector<double> rhs(n, 0.0);
        rhs[0] = 1.0;
        lu.solve(rhs);
        u = std::move(rhs);
    }

    for (double v : u)
        if (!(v > 0.0)) throw SolverFailure("gauduchon_factor: non-positive conformal factor");
    ScalarField G(g);
    for (int i = 0; i < n; ++i) G[i] = std::log(u[i]);
    const double m = mean_of(G.values);
    for (double& v : G.values) v -= m;
    return G;
}

} // namespace hermflow
