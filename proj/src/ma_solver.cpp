#include "hermflow/ma_solver.hpp"

#include <algorithm>
#include <cmath>

#include "hermflow/errors.hpp"
#include "hermflow/linalg.hpp"
#include "hermflow/newton.hpp"

namespace hermflow {

namespace {

// Mass ratio c = int (theta+ddc phi)^n / int f omega_ref^n.  On BlowupCalabi
// both integrals run over interior nodes so that the update is consistent
// with the collocated residual rows.
double mass_ratio(const VolumeDensity& ma, const std::vector<double>& f_ref_dens, const GeometryPtr& g) {
    if (g->kind == GeometryKind::BlowupCalabi) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 1; i + 1 < ma.values.size(); ++i) {
            num += ma.values[i];
            den += f_ref_dens[i];
        }
        return num / den;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ma.values.size(); ++i) {
        num += ma.values[i];
        den += f_ref_dens[i];
    }
    return num / den;
}

} // namespace

ScalarField singularity_potential(const GeometryPtr& g) {
    ScalarField r(g, 0.0);
    if (g->kind == GeometryKind::BlowupCalabi) {
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = std::min(g->rho(i) - (g->rho_min + 1.0), 0.0);
    }
    return r;
}

SolveReport solve_ma(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                     double tol, const MaOptions& opts) {
    require_same_geometry(theta.geo, f.geo, "solve_ma");
    require_same_geometry(theta.geo, omega_ref.geo, "solve_ma");
    if (!f.finite() || !theta.finite()) throw NanInput("solve_ma data");
    if (positivity_margin(theta, omega_ref) <= 0.0) throw NonPositiveForm("solve_ma: theta");
    if (f.min() <= 0.0) throw NonPositiveForm("solve_ma: density f must be positive");
    if (!(tol > 0.0)) throw ConfigError("solve_ma: tol must be positive");

    const GeometryPtr g = theta.geo;
    const std::size_t n = g->node_count();
    const auto ref_dens = ma_density(omega_ref);
    std::vector<double> f_ref(n);
    for (std::size_t i = 0; i < n; ++i) f_ref[i] = f[i] * ref_dens.values[i];

    ScalarField phi = opts.warm_start ? *opts.warm_start : ScalarField(g, 0.0);
    double c = 1.0;

    auto residual = [&](const ScalarField& p, const OneOneForm& omega_p, double cc) {
        const auto ma = ma_density(omega_p);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = std::log(ma.values[i]) - std::log(cc * f_ref[i]);
        apply_radial_bc_rows(g, p.values, r);
        return r;
    };

    SolveReport rep;
    int iters = 0;
    OneOneForm omega_phi = add_ddc(theta, phi);
    if (!collocation_positive(omega_phi)) throw NonPositiveForm("solve_ma: warm start not admissible");

    double res_linf = 0.0;
    bool converged = false;
    for (; iters < opts.max_iter; ++iters) {
        const auto ma = ma_density(omega_phi);
        c = mass_ratio(ma, f_ref, g);
        auto r = residual(phi, omega_phi, c);
        res_linf = sup_norm(r);
        if (res_linf <= tol) {
            converged = true;
            break;
        }

        TraceOperator op;
        op.omega = &omega_phi;
        op.alpha = 0.0;
        op.ctr = 1.0;
        op.bordered = true;
        for (double& v : r) v = -v;
        double mu = 0.0;
        auto delta = solve_trace_system(op, r, &mu);

        double s = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, s *= 0.5) {
            ScalarField trial(g);
            for (std::size_t i = 0; i < n; ++i) trial[i] = phi[i] + s * delta[i];
            OneOneForm omega_trial = add_ddc(theta, trial);
            if (!collocation_positive(omega_trial)) continue;
            const auto rt = residual(trial, omega_trial, c);
            const double rn = sup_norm(rt);
            if (rn <= res_linf * (1.0 - 1e-4 * s) || rn <= 0.5 * tol) {
                phi = std::move(trial);
                omega_phi = std::move(omega_trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) throw LineSearchStall("solve_ma at residual " + std::to_string(res_linf));
    }
    if (!converged) throw MaxIterations("solve_ma: residual " + std::to_string(res_linf));

    // normalization sup phi = 0
    const double m = phi.max();
    for (double& v : phi.values) v -= m;
    omega_phi = add_ddc(theta, phi);

    rep.phi = std::move(phi);
    rep.c = c;
    rep.residual_linf = res_linf;
    rep.iterations = iters;
    rep.positivity_margin_final = positivity_margin(omega_phi, omega_ref);
    rep.converged = true;
    return rep;
}

ContinuityPathReport continuity_path(const OneOneForm& theta, const ScalarField& f,
                                     const OneOneForm& omega_ref, const std::vector<double>& t_ladder,
                                     double tol, const MaOptions& opts) {
    if (t_ladder.empty()) throw ConfigError("continuity_path: empty ladder");
    for (std::size_t i = 1; i < t_ladder.size(); ++i)
        if (!(t_ladder[i] < t_ladder[i - 1])) throw NonMonotoneLadder("continuity_path t-ladder");

    ContinuityPathReport out;
    MaOptions rung_opts = opts;
    ScalarField warm;
    for (double t : t_ladder) {
        const OneOneForm theta_t = theta + t * omega_ref;
        auto rep = solve_ma(theta_t, f, omega_ref, tol, rung_opts);
        warm = rep.phi;
        rung_opts.warm_start = &warm;
        out.ladder.emplace_back(t, std::move(rep));
    }
    out.limit_phi = out.ladder.back().second.phi;

    // Saturation mask for the interior Laplacian bound: nodes whose trace
    // exceeds three times the fitted C * exp(-A * rho_sing) envelope.
    const GeometryPtr g = theta.geo;
    const OneOneForm omega_final =
        add_ddc(theta + t_ladder.back() * omega_ref, out.limit_phi);
    const ScalarField tr = trace_form(omega_final, omega_ref);
    const ScalarField rho_sing = singularity_potential(g);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (rho_sing[i] < 0.0 && tr[i] > 0.0) {
            xs.push_back(-rho_sing[i]);
            ys.push_back(std::log(tr[i]));
        }
    double A = 0.0, logC = 0.0;
    if (xs.size() >= 2) {
        const auto fit = linear_fit(xs, ys);
        A = std::max(fit.slope, 0.0);
        logC = fit.intercept;
    } else {
        double s = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < tr.size(); ++i)
            if (tr[i] > 0.0) {
                s += std::log(tr[i]);
                ++cnt;
            }
        logC = cnt ? s / static_cast<double>(cnt) : 0.0;
    }
    // tighten C to the actual envelope
    double lift = -1e300;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr[i] > 0.0) lift = std::max(lift, std::log(tr[i]) + A * rho_sing[i]);
    if (lift > -1e300) logC = lift;
    out.envelope_C = std::exp(logC);
    out.envelope_A = A;

    out.singular_region_estimate.assign(tr.size(), 0);
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr[i] > 3.0 * std::exp(logC - A * rho_sing[i]))
            out.singular_region_estimate[i] = 1;
    return out;
}

CBounds c_bounds_check(const SolveReport& report, const OneOneForm& theta, const ScalarField& f,
                       const OneOneForm& omega_ref, const ScalarField& gauduchon_G) {
    require_same_geometry(theta.geo, gauduchon_G.geo, "c_bounds_check");
    const GeometryPtr g = theta.geo;
    const int n = g->complex_dim();
    const std::size_t nn = g->node_count();
    const OneOneForm omega_phi = add_ddc(theta, report.phi);
    const auto ref_dens = ma_density(omega_ref);

    CBounds out;
    if (n == 1) {
        // c^{1/n} reduces to the plain mass ratio in dimension one.
        VolumeDensity fd(g, std::vector<double>(nn));
        for (std::size_t i = 0; i < nn; ++i) fd.values[i] = f[i] * ref_dens.values[i];
        out.upper = integrate(wedge_top(omega_phi)) / integrate(fd);
        out.lower = integrate(wedge_top(theta)) / integrate(fd);
    } else {
        // int omega_phi ^ e^G omega_ref  >=  c^{1/n} int f^{1/n} e^{(n-1)G/n} omega_ref^n
        OneOneForm twisted = omega_ref;
        for (auto& comp : twisted.comps)
            for (std::size_t i = 0; i < nn; ++i) comp[i] *= std::exp(gauduchon_G[i]);
        const double pairing = integrate(wedge_top(omega_phi, twisted));
        VolumeDensity den(g, std::vector<double>(nn));
        for (std::size_t i = 0; i < nn; ++i)
            den.values[i] = std::pow(f[i], 1.0 / n) * std::exp((n - 1) * gauduchon_G[i] / n) * ref_dens.values[i];
        const double ratio = pairing / integrate(den);
        out.upper = std::pow(ratio, n);

        VolumeDensity fd(g, std::vector<double>(nn));
        for (std::size_t i = 0; i < nn; ++i) fd.values[i] = f[i] * ref_dens.values[i];
        out.lower = integrate(ma_density(theta)) / integrate(fd);
    }
    out.lower = std::min(out.lower, out.upper);
    out.pass = report.c <= out.upper * (1.0 + 1e-8) && report.c >= out.lower * (1.0 - 1e-6);
    return out;
}

} // namespace hermflow
