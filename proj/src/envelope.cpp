#include "hermflow/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "hermflow/errors.hpp"
#include "hermflow/newton.hpp"

namespace hermflow {

namespace {

} // namespace

double beta_epsilon(double beta) { return beta >= 50.0 ? 0.0 : std::pow(2.0, -beta); }

namespace {

ScalarField solve_beta_once(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                            double beta, const BetaOptions& opts);

} // namespace

ScalarField solve_beta(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                       double beta, const BetaOptions& opts) {
    require_same_geometry(theta.geo, f.geo, "solve_beta");
    require_same_geometry(theta.geo, omega_ref.geo, "solve_beta");
    if (!f.finite()) throw NanInput("solve_beta obstacle");
    if (beta < 1.0) throw ConfigError("solve_beta: beta must be >= 1");

    // Direct solve, with bisection continuation in beta when the Newton path
    // stalls (deep degenerate regions move through many orders of magnitude
    // in density between rungs).
    struct Rung {
        double beta;
        int depth;
    };
    std::vector<Rung> stack = {{beta, 0}};
    ScalarField warm = opts.warm_start ? *opts.warm_start : ScalarField(theta.geo, 0.0);
    double beta_reached = 0.0;
    while (!stack.empty()) {
        const Rung r = stack.back();
        stack.pop_back();
        BetaOptions o = opts;
        o.warm_start = &warm;
        try {
            warm = solve_beta_once(theta, f, omega_ref, r.beta, o);
            beta_reached = r.beta;
        } catch (const PositivityLoss&) {
            if (r.depth >= 6) throw;
            const double lo = std::max(beta_reached, 1.0);
            stack.push_back({r.beta, r.depth + 1});
            stack.push_back({0.5 * (lo + r.beta), r.depth + 1});
        } catch (const MaxIterations&) {
            if (r.depth >= 6) throw;
            const double lo = std::max(beta_reached, 1.0);
            stack.push_back({r.beta, r.depth + 1});
            stack.push_back({0.5 * (lo + r.beta), r.depth + 1});
        }
    }
    return warm;
}

namespace {

// Complex dimension one: the Monge-Ampere density is linear in phi, so the
// equation is solved in its unlogged density form
//   ma(phi)/ref - e^{beta (phi - f)} = 0,
// whose residual stays well-conditioned where the constraint degenerates and
// whose Jacobian is the fixed trace operator plus an exponential diagonal.
ScalarField solve_beta_linear_density(const OneOneForm& theta, const ScalarField& f,
                                      const OneOneForm& omega_ref, double beta, const BetaOptions& opts) {
    const GeometryPtr g = theta.geo;
    const std::size_t n = g->node_count();
    const OneOneForm theta_b = theta + beta_epsilon(beta) * omega_ref;
    const auto ref_dens = ma_density(omega_ref);

    ScalarField phi = opts.warm_start ? *opts.warm_start : ScalarField(g, 0.0);

    auto residual = [&](const ScalarField& p, std::vector<double>& expo) {
        const auto ma = ma_density(add_ddc(theta_b, p));
        std::vector<double> r(n);
        expo.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            expo[i] = std::exp(std::min(beta * (p[i] - f[i]), 40.0));
            r[i] = ma.values[i] / ref_dens.values[i] - expo[i];
        }
        return r;
    };

    const double rtol = opts.tol * (1.0 + beta);
    std::vector<double> expo;
    auto r = residual(phi, expo);
    double rn = sup_norm(r);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (rn <= rtol) return phi;

        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = -beta * expo[i];
        TraceOperator op;
        op.omega = &omega_ref;
        op.alpha = 0.0;
        op.ctr = 1.0;
        op.zdiag = &z;
        for (double& v : r) v = -v;
        auto delta = solve_trace_system(op, r);

        double s = std::min(1.0, 4.0 / (beta * sup_norm(delta) + 1e-300));
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, s *= 0.5) {
            ScalarField trial(g);
            for (std::size_t i = 0; i < n; ++i) trial[i] = phi[i] + s * delta[i];
            std::vector<double> expo_t;
            auto rt = residual(trial, expo_t);
            const double rtn = sup_norm(rt);
            if (rtn <= rn * (1.0 - 1e-4 * s) || rtn <= 0.5 * rtol) {
                phi = std::move(trial);
                expo = std::move(expo_t);
                r = std::move(rt);
                rn = rtn;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw PositivityLoss("solve_beta density-form line search stalled at residual " +
                                 std::to_string(rn));
    }
    throw MaxIterations("solve_beta density form: residual " + std::to_string(rn));
}

ScalarField solve_beta_once(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                            double beta, const BetaOptions& opts) {

    const GeometryPtr g = theta.geo;
    if (g->complex_dim() == 1) return solve_beta_linear_density(theta, f, omega_ref, beta, opts);
    const std::size_t n = g->node_count();
    const OneOneForm theta_b = theta + beta_epsilon(beta) * omega_ref;
    const auto ref_dens = ma_density(omega_ref);

    ScalarField phi = opts.warm_start ? *opts.warm_start : ScalarField(g, 0.0);
    OneOneForm omega_phi = add_ddc(theta_b, phi);
    if (!collocation_positive(omega_phi)) {
        phi = ScalarField(g, 0.0);
        omega_phi = theta_b;
        if (!collocation_positive(omega_phi)) throw PositivityLoss("solve_beta: theta + 2^-beta omega not positive");
    }

    auto residual = [&](const ScalarField& p, const OneOneForm& omega_p) {
        const auto ma = ma_density(omega_p);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = std::log(ma.values[i] / ref_dens.values[i]) - beta * (p[i] - f[i]);
        apply_radial_bc_rows(g, p.values, r);
        return r;
    };

    // Where the constraint degenerates the density collapses towards zero
    // and the log-residual saturates at differentiation roundoff divided by
    // the density; convergence is measured above that per-node floor.
    auto weighted_sup = [&](const std::vector<double>& r, const OneOneForm& omega_p) {
        const auto ma = ma_density(omega_p);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double floor_i = 1e-11 * ref_dens.values[i] / std::max(ma.values[i], 1e-300);
            s = std::max(s, std::max(std::abs(r[i]) - floor_i, 0.0));
        }
        return s;
    };

    // The zeroth-order term scales the residual by beta; convergence is
    // measured on the potential-scale residual r / beta, which is what
    // bounds the error in phi.
    const double rtol = opts.tol * (1.0 + beta);
    auto r = residual(phi, omega_phi);
    double rn = weighted_sup(r, omega_phi);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (rn <= rtol) return phi;

        std::vector<double> z(n, -beta);
        if (g->kind == GeometryKind::BlowupCalabi) z.front() = z.back() = 0.0;
        TraceOperator op;
        op.omega = &omega_phi;
        op.alpha = 0.0;
        op.ctr = 1.0;
        op.zdiag = &z;
        for (double& v : r) v = -v;
        auto delta = solve_trace_system(op, r);

        // log-scale trust region: keep beta * step bounded
        double s = std::min(1.0, 4.0 / (beta * sup_norm(delta) + 1e-300));
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, s *= 0.5) {
            ScalarField trial(g);
            for (std::size_t i = 0; i < n; ++i) trial[i] = phi[i] + s * delta[i];
            OneOneForm omega_trial = add_ddc(theta_b, trial);
            if (!collocation_positive(omega_trial)) continue;
            auto rt = residual(trial, omega_trial);
            const double rtn = weighted_sup(rt, omega_trial);
            if (rtn <= rn * (1.0 - 1e-4 * s) || rtn <= 0.5 * rtol) {
                phi = std::move(trial);
                omega_phi = std::move(omega_trial);
                r = std::move(rt);
                rn = rtn;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw PositivityLoss("solve_beta line search stalled at residual " + std::to_string(rn));
    }
    throw MaxIterations("solve_beta: residual " + std::to_string(rn));
}

} // namespace

ScalarField envelope_oracle_lcp(const OneOneForm& theta, const ScalarField& f, double tol) {
    if (theta.geo->kind != GeometryKind::Torus1)
        throw UnsupportedGeometry("envelope_oracle_lcp needs Torus1");
    require_same_geometry(theta.geo, f.geo, "envelope_oracle_lcp");

    const auto& g = *theta.geo;
    const int nx = g.grid[0], ny = g.grid[1];
    const double hx = g.period / nx, hy = g.period / ny;
    const double cx = 1.0 / (hx * hx), cy = 1.0 / (hy * hy);
    const double diag = 2.0 * (cx + cy);

    // density(theta + ddc phi) = T + Lap_fd(phi)/2 with T = 2 * theta_a
    std::vector<double> T(theta.comps[0].size());
    for (std::size_t i = 0; i < T.size(); ++i) T[i] = 2.0 * theta.comps[0][i];

    std::vector<double> phi(f.values); // start on the obstacle
    auto at = [&](int i, int j) -> double& {
        return phi[static_cast<std::size_t>(((i + nx) % nx)) * ny + ((j + ny) % ny)];
    };

    const double omega_sor = 1.8;
    const int max_sweeps = 400000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const double nb = cx * (at(i + 1, j) + at(i - 1, j)) + cy * (at(i, j + 1) + at(i, j - 1));
                const std::size_t m = static_cast<std::size_t>(i) * ny + j;
                // solve T + (nb - diag*phi)/2 = 0 for phi
                const double unconstrained = (2.0 * T[m] + nb) / diag;
                double v = phi[m] + omega_sor * (unconstrained - phi[m]);
                phi[m] = std::min(v, f[m]);
            }
        // complementarity residual
        double res = 0.0;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const double nb = cx * (at(i + 1, j) + at(i - 1, j)) + cy * (at(i, j + 1) + at(i, j - 1));
                const std::size_t m = static_cast<std::size_t>(i) * ny + j;
                const double dens = T[m] + 0.5 * (nb - diag * phi[m]);
                const double slack = f[m] - phi[m];
                res = std::max(res, std::abs(std::min(dens, slack)));
                res = std::max(res, std::max(-dens, 0.0));
                res = std::max(res, std::max(-slack, 0.0));
            }
        if (res <= tol) return ScalarField(theta.geo, std::move(phi));
    }
    throw MaxIterations("envelope_oracle_lcp projected SOR");
}

BetaFamilyReport beta_ladder(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                             const std::vector<double>& betas, const BetaLadderOptions& opts) {
    if (betas.empty()) throw ConfigError("beta_ladder: empty ladder");
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (!(betas[i] > betas[i - 1])) throw NonMonotoneLadder("beta ladder must increase");

    BetaFamilyReport out;
    const GeometryPtr g = theta.geo;
    BetaOptions inner = opts.inner;
    ScalarField warm;
    for (double b : betas) {
        BetaRung rung;
        rung.beta = b;
        rung.phi = solve_beta(theta, f, omega_ref, b, inner);
        warm = rung.phi;
        inner.warm_start = &warm;
        out.ladder.push_back(std::move(rung));
    }

    if (opts.use_oracle && g->kind == GeometryKind::Torus1) {
        out.envelope_estimate = envelope_oracle_lcp(theta, f);
        out.oracle_used = true;
    } else {
        out.envelope_estimate = out.ladder.back().phi;
    }

    std::vector<std::uint8_t> measured(g->node_count(), 1);
    if (opts.rho_cut && g->is_radial()) {
        for (std::size_t i = 0; i < measured.size(); ++i)
            measured[i] = g->rho(i) >= *opts.rho_cut ? 1 : 0;
    }
    for (auto& rung : out.ladder) {
        double e = 0.0;
        for (std::size_t i = 0; i < measured.size(); ++i)
            if (measured[i]) e = std::max(e, std::abs(rung.phi[i] - out.envelope_estimate[i]));
        rung.error_vs_envelope = e;
    }

    // Fit err ~ C log(beta)/beta on the top half, then check the shape.
    const std::size_t nl = out.ladder.size();
    std::vector<double> logratio;
    for (std::size_t k = nl / 2; k < nl; ++k) {
        const double m = std::log(out.ladder[k].beta) / out.ladder[k].beta;
        if (out.ladder[k].error_vs_envelope > 0.0)
            logratio.push_back(std::log(out.ladder[k].error_vs_envelope / m));
    }
    double C = 0.0;
    if (!logratio.empty()) {
        double s = 0.0;
        for (double v : logratio) s += v;
        C = std::exp(s / static_cast<double>(logratio.size()));
    }
    out.rate_fit.C = C;
    out.rate_fit.exponent_ok = C > 0.0;
    for (std::size_t k = 0; k < nl; ++k) {
        const double e = out.ladder[k].error_vs_envelope;
        if (e <= 0.0) continue;
        const double m = C * std::log(out.ladder[k].beta) / out.ladder[k].beta;
        const double ratio = e / m;
        out.rate_fit.ratios.push_back(ratio);
        if (!(ratio >= 1.0 / 3.0 && ratio <= 3.0)) out.rate_fit.exponent_ok = false;
    }
    return out;
}

double default_contact_tolerance(const GeometryPtr& g, const ScalarField& f) {
    double h = 0.0;
    if (g->is_radial()) {
        h = g->radial_spacing();
    } else {
        for (int n : g->grid) h = std::max(h, g->period / n);
    }
    return 10.0 * h * h * (1.0 + f.sup_abs());
}

ContactReport contact_ma_concentration(const OneOneForm& theta, const ScalarField& phi,
                                       const ScalarField& f, const OneOneForm& omega_ref, double tol) {
    require_same_geometry(theta.geo, phi.geo, "contact_ma_concentration");
    (void)omega_ref;
    const GeometryPtr g = theta.geo;
    const std::size_t n = g->node_count();

    ContactReport out;
    out.contact.tolerance = tol;
    out.contact.mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (phi[i] >= f[i] - tol) out.contact.mask[i] = 1;

    const OneOneForm omega_phi = theta + ddc_fd(phi);
    const auto dens = ma_density(omega_phi);

    // geometry quadrature weights
    double on = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (g->kind == GeometryKind::BlowupCalabi && (i == 0 || i + 1 == n)) w = 0.5;
        const double m = w * std::abs(dens.values[i]);
        total += m;
        if (out.contact.mask[i]) on += m;
    }
    if (total <= 1e-14 * static_cast<double>(n) * (1.0 + form_scale(theta))) {
        out.degenerate_total_mass = true;
        out.off_mass_fraction = 0.0;
        return out;
    }
    out.off_mass_fraction = (total - on) / total;
    return out;
}

LaplacianBoundCheck laplacian_bound_check(const BetaFamilyReport& report, const OneOneForm& omega_ref,
                                          const ScalarField& rho_sing, double B) {
    LaplacianBoundCheck out;
    const std::size_t nl = report.ladder.size();
    if (nl == 0) return out;
    for (std::size_t k = nl / 2; k < nl; ++k) {
        const ScalarField lap = trace_form(ddc(report.ladder[k].phi), omega_ref);
        double C = 0.0;
        for (std::size_t i = 0; i < lap.size(); ++i)
            C = std::max(C, lap[i] * std::exp(B * rho_sing[i]));
        out.fitted_C.push_back(C);
    }
    double lo = 1e300, hi = 0.0;
    for (double c : out.fitted_C) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    out.pass = hi > 0.0 && hi <= 2.0 * std::max(lo, 1e-12);
    return out;
}

} // namespace hermflow
