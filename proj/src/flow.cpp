#include "hermflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hermflow/errors.hpp"
#include "hermflow/linalg.hpp"
#include "hermflow/ma_solver.hpp"
#include "hermflow/newton.hpp"

namespace hermflow {

namespace {

double jaccard(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) ++inter;
        if (a[i] || b[i]) ++uni;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct FeasibilityData {
    std::vector<double> a0, b0, ra, rb, aref, bref;
    GeometryPtr geo;
};

// Discretized class-positivity test: does some potential g = psi' satisfy
// a_theta + g >= s a_ref and b_theta + g' >= s b_ref with the right boundary
// behavior?  Periodic case: the minimal admissible g exists iff the slope
// constraint has non-positive circulation and the lifted minimal path has
// non-positive mean.  Interval case: march the minimal path from g(-R) = 0
// and require it to return below zero at +R.
bool class_feasible(const FeasibilityData& d, double t, double s) {
    const int n = static_cast<int>(d.a0.size());
    const double h = d.geo->radial_spacing();
    std::vector<double> alpha(n), beta(n);
    for (int i = 0; i < n; ++i) {
        alpha[i] = s * d.aref[i] - (d.a0[i] - t * d.ra[i]);
        beta[i] = s * d.bref[i] - (d.b0[i] - t * d.rb[i]);
    }

    if (d.geo->kind == GeometryKind::Hopf) {
        double circ = 0.0;
        for (int i = 0; i < n; ++i) circ += beta[i];
        circ *= h;
        if (circ > 1e-13) return false;
        std::vector<double> B(n + 1, 0.0);
        for (int i = 0; i < n; ++i) B[i + 1] = B[i] + h * beta[i];
        double meang = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = -1e300;
            for (int j = i - n + 1; j <= i; ++j) {
                const int jj = (j % n + n) % n;
                const double lift = j < 0 ? circ : 0.0;
                best = std::max(best, alpha[jj] + B[i] - B[jj] + lift);
            }
            meang += best;
        }
        meang /= n;
        return meang <= 1e-12;
    }

    // BlowupCalabi: g(-R) = g(R) = 0
    if (alpha[0] > 0.0) return false;
    double g = 0.0;
    for (int i = 1; i < n; ++i) {
        g = std::max(alpha[i], g + 0.5 * h * (beta[i - 1] + beta[i]));
    }
    return g <= 1e-12;
}

double fit_phi_bound(const std::vector<TrajectorySample>& traj) {
    double c = 0.0;
    for (const auto& s : traj) c = std::max({c, s.sup_phi, s.phi_lower_gap});
    return c;
}

double fit_phi_dot_bound(const std::vector<TrajectorySample>& traj) {
    double c = 0.0;
    for (const auto& s : traj) c = std::max({c, s.sup_abs_phi_dot, s.dot_lower_gap});
    return c;
}

void fit_trace_envelope(const FlowReport& report, double* C_out, double* A_out) {
    const ScalarField rho_sing = singularity_potential(report.geo);
    const ScalarField tr = trace_form(report.omega_final, report.omega0);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (rho_sing[i] < 0.0 && tr[i] > 0.0) {
            xs.push_back(-rho_sing[i]);
            ys.push_back(std::log(tr[i]));
        }
    double A = 0.0;
    if (xs.size() >= 2) A = std::max(linear_fit(xs, ys).slope, 0.0);
    double logC = -1e300;
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr[i] > 0.0) logC = std::max(logC, std::log(tr[i]) + A * rho_sing[i]);
    *C_out = logC > -1e300 ? std::exp(logC) : 0.0;
    *A_out = A;
}

} // namespace

OneOneForm theta_t_form(const OneOneForm& omega0, const OneOneForm& ricci0, double t) {
    return omega0 - t * ricci0;
}

FlowState flow_step(const FlowState& state, const OneOneForm& omega0, const OneOneForm& ricci0,
                    double dt, const FlowOptions& opts) {
    const GeometryPtr g = omega0.geo;
    const std::size_t n = g->node_count();
    const auto dens0 = ma_density(omega0);

    while (dt >= opts.dt_min) {
        const double t_next = state.t + dt;
        const OneOneForm theta_next = theta_t_form(omega0, ricci0, t_next);

        bool ok = true;
        ScalarField psi = state.phi;
        OneOneForm omega_psi = add_ddc(theta_next, psi);
        if (!collocation_positive(omega_psi)) ok = false;

        std::vector<double> F_next;
        if (ok) {
            // r(psi) = psi - phi - dt/2 (F_prev + F(t+dt, psi))
            auto eval = [&](const ScalarField& p, OneOneForm& om, std::vector<double>& F,
                            std::vector<double>& r) {
                om = add_ddc(theta_next, p);
                const auto ma = ma_density(om);
                F.resize(n);
                r.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    F[i] = std::log(ma.values[i] / dens0.values[i]);
                    r[i] = p[i] - state.phi[i] - 0.5 * dt * (state.phi_dot[i] + F[i]);
                }
                apply_radial_bc_rows(g, p.values, r);
            };

            std::vector<double> r;
            eval(psi, omega_psi, F_next, r);
            double rn = sup_norm(r);
            int newton = 0;
            for (; newton < opts.max_newton && rn > opts.newton_tol; ++newton) {
                TraceOperator op;
                op.omega = &omega_psi;
                op.alpha = 1.0;
                op.ctr = -0.5 * dt;
                for (double& v : r) v = -v;
                std::vector<double> delta;
                try {
                    delta = solve_trace_system(op, r);
                } catch (const SolverFailure&) {
                    ok = false;
                    break;
                }
                double s = 1.0;
                bool accepted = false;
                for (int hlv = 0; hlv < 30; ++hlv, s *= 0.5) {
                    ScalarField trial(g);
                    for (std::size_t i = 0; i < n; ++i) trial[i] = psi[i] + s * delta[i];
                    OneOneForm om_t;
                    std::vector<double> Ft, rt;
                    om_t = add_ddc(theta_next, trial);
                    if (!collocation_positive(om_t)) continue;
                    eval(trial, om_t, Ft, rt);
                    const double rtn = sup_norm(rt);
                    if (rtn <= rn * (1.0 - 1e-4 * s) || rtn <= 0.5 * opts.newton_tol) {
                        psi = std::move(trial);
                        omega_psi = std::move(om_t);
                        F_next = std::move(Ft);
                        r = std::move(rt);
                        rn = rtn;
                        accepted = true;
                        break;
                    }
                }
                if (!accepted) {
                    ok = false;
                    break;
                }
            }
            if (rn > opts.newton_tol) ok = false;
        }

        if (ok) {
            const auto margins = pointwise_margin(omega_psi, omega0);
            const double m = *std::min_element(margins.begin(), margins.end());
            if (m < opts.margin_floor) ok = false;
            if (ok) {
                FlowState next;
                next.t = t_next;
                next.phi = std::move(psi);
                next.phi_dot = ScalarField(g, std::move(F_next));
                next.omega_t = std::move(omega_psi);
                next.margin = m;
                next.dt_next = std::min(dt * 1.4, opts.dt_max);
                return next;
            }
        }
        dt *= 0.5;
    }
    throw StepFailure("flow step at t = " + std::to_string(state.t));
}

double predicted_maximal_time(const OneOneForm& omega0, const OneOneForm& ricci0, double t_hi) {
    const GeometryPtr g = omega0.geo;
    if (!g->is_radial()) {
        // Torus Ricci forms are ddc-exact, so the class never moves and the
        // feasibility test holds for every t up to the bracket cap.
        return t_hi;
    }
    FeasibilityData d;
    d.geo = g;
    d.a0 = omega0.comps[0];
    d.b0 = omega0.comps[1];
    d.ra = ricci0.comps[0];
    d.rb = ricci0.comps[1];
    const OneOneForm ref = reference_metric(g);
    d.aref = ref.comps[0];
    d.bref = ref.comps[1];

    const double s_tiny = 1e-12;
    if (!class_feasible(d, 0.0, s_tiny)) throw BracketFailure("class infeasible at t = 0");
    if (class_feasible(d, t_hi, s_tiny)) return t_hi;
    double lo = 0.0, hi = t_hi;
    while (hi - lo > 1e-11) {
        const double mid = 0.5 * (lo + hi);
        (class_feasible(d, mid, s_tiny) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

FlowReport run_flow(const OneOneForm& omega0, const FlowOptions& opts, const FlowThresholds& thresholds) {
    const GeometryPtr g = omega0.geo;
    if (!is_positive(omega0)) throw NonPositiveForm("run_flow: omega0");
    const std::size_t n = g->node_count();

    FlowReport rep;
    rep.geo = g;
    rep.omega0 = omega0;
    rep.ricci0 = ricci_form(omega0);
    rep.T_predicted = predicted_maximal_time(omega0, rep.ricci0, opts.t_max);

    const ScalarField rho_sing = singularity_potential(g);
    const bool radial = g->is_radial();
    const int r_every = n > 100000 ? 4 : 1;

    FlowState state;
    state.t = 0.0;
    state.phi = ScalarField(g, 0.0);
    state.phi_dot = ScalarField(g, 0.0);
    state.omega_t = omega0;
    state.margin = 1.0;
    state.dt_next = opts.dt_initial;

    rep.rmax_field.assign(n, 0.0);

    auto record = [&](FlowState& st, double dt_used, int step_idx) {
        TrajectorySample s;
        s.t = st.t;
        s.dt = dt_used;
        s.margin = st.margin;
        s.volume = integrate(ma_density(st.omega_t));
        s.sup_phi = st.phi.max();
        s.sup_abs_phi_dot = st.phi_dot.sup_abs();
        double gap = 0.0, dgap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gap = std::max(gap, rho_sing[i] - st.phi[i]);
            dgap = std::max(dgap, st.phi_dot[i] / (rho_sing[i] - 1.0));
        }
        s.phi_lower_gap = gap;
        s.dot_lower_gap = std::max(dgap, 0.0);
        for (const auto& tag : g->tracked) s.restricted.push_back(restricted_volume(st.omega_t, tag));
        if (step_idx % r_every == 0) {
            ScalarField R = scalar_curvature(st.omega_t);
            double supR = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = std::abs(R[i]);
                supR = std::max(supR, a);
                rep.rmax_field[i] = std::max(rep.rmax_field[i], a);
            }
            s.sup_R = supR;
            st.scalar_curvature = std::move(R);
        } else {
            s.sup_R = rep.trajectory.empty() ? 0.0 : rep.trajectory.back().sup_R;
        }
        rep.trajectory.push_back(std::move(s));
        if (radial) rep.phi_samples.emplace_back(st.t, st.phi);
        rep.ring.emplace_back(st.t, st.phi);
        while (rep.ring.size() > static_cast<std::size_t>(thresholds.cauchy_window)) rep.ring.pop_front();
    };

    record(state, 0.0, 0);

    double dt = opts.dt_initial;
    int step = 0;
    while (step < opts.max_steps) {
        if (state.t >= opts.t_max - 1e-14) {
            rep.hit_time_cap = true;
            break;
        }
        dt = std::min(dt, opts.t_max - state.t);
        FlowState next;
        try {
            next = flow_step(state, omega0, rep.ricci0, dt, opts);
        } catch (const StepFailure&) {
            rep.blowup_detected = true;
            break;
        }
        const double dt_used = next.t - state.t;
        state = std::move(next);
        ++step;
        record(state, dt_used, step);
        dt = state.dt_next;
    }

    rep.T_estimate = state.t;
    rep.limit_potential = state.phi;
    rep.omega_final = state.omega_t;
    rep.final_margin_field = pointwise_margin(rep.omega_final, omega0);
    return rep;
}

std::pair<double, double> maximal_time(const OneOneForm& omega0, double t_lo, double t_hi,
                                       const FlowOptions& opts_in) {
    if (!(t_hi > t_lo && t_lo >= 0.0)) throw BracketFailure("maximal_time bracket");
    FlowOptions opts = opts_in;
    opts.t_max = t_hi;
    FlowThresholds th;
    const auto rep = run_flow(omega0, opts, th);
    return {rep.T_estimate, rep.T_predicted};
}

SingularityDiagnostics singularity_report(FlowReport& report, const FlowThresholds& thresholds) {
    const GeometryPtr g = report.geo;
    const std::size_t n = g->node_count();
    SingularityDiagnostics diag;
    for (const auto& s : report.trajectory) diag.sup_R_series.emplace_back(s.t, s.sup_R);

    report.sigma_mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (report.rmax_field[i] > thresholds.curvature) report.sigma_mask[i] = 1;

    // Z: degenerating limit margin, or a Cauchy rate of the metric
    // coefficients (and their first two local derivatives) far above the
    // quiet-node floor over the last samples.
    report.singular_mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (report.final_margin_field[i] <= thresholds.z_margin_ratio) report.singular_mask[i] = 1;

    std::vector<double> stat(n, 0.0);
    const auto& ring = report.ring;
    for (std::size_t p = 0; p + 1 < ring.size(); ++p) {
        const double dt = std::max(ring[p + 1].first - ring[p].first, 1e-300);
        const OneOneForm wa = add_ddc(theta_t_form(report.omega0, report.ricci0, ring[p].first), ring[p].second);
        const OneOneForm wb =
            add_ddc(theta_t_form(report.omega0, report.ricci0, ring[p + 1].first), ring[p + 1].second);
        for (std::size_t c = 0; c < wa.comps.size(); ++c) {
            std::vector<double> d(n);
            for (std::size_t i = 0; i < n; ++i) d[i] = wb.comps[c][i] - wa.comps[c][i];
            std::vector<std::vector<double>> derivs;
            if (g->is_radial()) {
                derivs.push_back(radial_d1_fd(g, d));
                derivs.push_back(radial_d2_fd(g, d));
            } else {
                for (int ax = 0; ax < static_cast<int>(g->grid.size()); ++ax) {
                    derivs.push_back(torus_axis_diff(g, d, ax, 1));
                    derivs.push_back(torus_axis_diff(g, d, ax, 2));
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                double v = std::abs(d[i]);
                for (const auto& dv : derivs) v += std::abs(dv[i]);
                stat[i] = std::max(stat[i], v / dt);
            }
        }
    }
    const double quiet = percentile(stat, 0.10);
    diag.z_rate_threshold = thresholds.z_rate_factor * std::max(quiet, 1e-13);
    for (std::size_t i = 0; i < n; ++i)
        if (stat[i] > diag.z_rate_threshold) report.singular_mask[i] = 1;

    report.jaccard_z_sigma = jaccard(report.singular_mask, report.sigma_mask);

    std::vector<std::uint8_t> eneigh(n, 0);
    if (g->kind == GeometryKind::BlowupCalabi) {
        for (std::size_t i = 0; i < n; ++i)
            if (g->rho(i) <= g->rho_min + thresholds.e_neighborhood) eneigh[i] = 1;
    }
    report.jaccard_z_eneigh = jaccard(report.singular_mask, eneigh);

    diag.phi_bound_C = fit_phi_bound(report.trajectory);
    diag.phi_dot_bound_C = fit_phi_dot_bound(report.trajectory);
    fit_trace_envelope(report, &diag.trace_envelope_C, &diag.trace_envelope_A);
    return diag;
}

NullLocusVerdict null_locus_comparison(const FlowReport& report, const FlowThresholds& thresholds) {
    (void)thresholds;
    NullLocusVerdict out;
    const GeometryPtr g = report.geo;
    const auto& traj = report.trajectory;
    if (traj.size() < 4) throw SolverFailure("null_locus_comparison: trajectory too short");

    for (std::size_t k = 0; k < g->tracked.size(); ++k) {
        const double v0 = traj.front().restricted[k];
        const double vT = traj.back().restricted[k];
        const bool collapsing = v0 > 0.0 && vT <= 0.05 * v0;
        if (g->tracked[k].kind == SubvarietyKind::Whole) out.volume_ratio_final = v0 > 0.0 ? vT / v0 : 1.0;
        if (collapsing) out.collapsing.push_back(g->tracked[k].name);

        if (g->tracked[k].kind == SubvarietyKind::ExceptionalCurve) {
            std::vector<double> ts, vs;
            const double t_tail = 0.75 * report.T_estimate;
            for (const auto& s : traj)
                if (s.t >= t_tail) {
                    ts.push_back(s.t);
                    vs.push_back(s.restricted[k]);
                }
            if (ts.size() >= 2) {
                out.exceptional_slope = linear_fit(ts, vs).slope;
                out.exceptional_pairing = restricted_volume(report.ricci0, g->tracked[k]);
                if (out.exceptional_pairing != 0.0)
                    out.slope_rel_dev =
                        std::abs(out.exceptional_slope + out.exceptional_pairing) / std::abs(out.exceptional_pairing);
            }
        }
    }

    out.jaccard_mask_vs_neighborhood = report.jaccard_z_eneigh;

    bool whole_collapses = false;
    for (const auto& name : out.collapsing)
        for (const auto& tag : g->tracked)
            if (tag.name == name && tag.kind == SubvarietyKind::Whole) whole_collapses = true;

    if (whole_collapses) {
        out.kind = NullLocusKind::OutOfHypothesis;
        out.note = "total volume collapses as t -> T; the limit-class volume hypothesis fails and only "
                   "diagnostics are reported";
    } else if (out.collapsing.empty()) {
        out.kind = NullLocusKind::ConsistentTrivial;
        out.note = "no tracked subvariety collapses";
    } else {
        const bool mask_matches = report.jaccard_z_eneigh >= 0.5;
        out.kind = mask_matches ? NullLocusKind::Consistent : NullLocusKind::Inconsistent;
        out.note = mask_matches ? "collapsing subvarieties match the singularity mask region"
                                : "singularity mask does not match the collapsing region";
    }
    return out;
}

AprioriFits fit_apriori_bounds(const FlowReport& report) {
    AprioriFits f;
    f.phi_C = fit_phi_bound(report.trajectory);
    f.phi_dot_C = fit_phi_dot_bound(report.trajectory);
    fit_trace_envelope(report, &f.trace_C, &f.trace_A);
    return f;
}

bool fits_stable(const AprioriFits& a, const AprioriFits& b, double factor) {
    auto ok = [factor](double x, double y) {
        const double lo = std::min(x, y), hi = std::max(x, y);
        if (hi <= 1e-9) return true; // both trivial
        return hi <= factor * std::max(lo, 1e-9);
    };
    return ok(a.phi_C, b.phi_C) && ok(a.phi_dot_C, b.phi_dot_C) && ok(a.trace_C, b.trace_C);
}

ContractionProbe surgical_contraction_probe(const FlowReport& report, double rho_p, double rho_q) {
    const GeometryPtr g = report.geo;
    if (g->kind != GeometryKind::BlowupCalabi)
        throw UnsupportedGeometry("surgical_contraction_probe needs BlowupCalabi");
    if (report.phi_samples.empty()) throw SolverFailure("contraction probe: no samples");
    if (rho_p > rho_q) std::swap(rho_p, rho_q);

    const double h = g->radial_spacing();
    const std::size_t n = g->node_count();
    auto node_of = [&](double rho) {
        return static_cast<std::size_t>(std::clamp((rho - g->rho_min) / h, 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t ip = node_of(rho_p), iq = node_of(rho_q);

    ContractionProbe out;
    for (const auto& [t, phi] : report.phi_samples) {
        const OneOneForm omega = add_ddc(theta_t_form(report.omega0, report.ricci0, t), phi);
        // radial arc length: ds = sqrt(b/2) drho
        double dist = 0.0;
        for (std::size_t i = ip; i < iq; ++i)
            dist += 0.5 * h * (std::sqrt(std::max(omega.comps[1][i], 0.0) / 2.0) +
                               std::sqrt(std::max(omega.comps[1][i + 1], 0.0) / 2.0));
        out.distance_series.emplace_back(t, dist);
        // diameter of the exceptional fiber: Fubini-Study diameter scaled by
        // the ddc(rho)-coefficient at the end
        const double aE = std::max(omega.comps[0][0], 0.0);
        out.diameter_series.emplace_back(t, std::numbers::pi * std::sqrt(aE / 2.0));
    }
    out.initial_distance = out.distance_series.front().second;

    const double T = report.T_estimate;
    const double d_final = out.distance_series.back().second;
    double var = 0.0;
    for (const auto& [t, d] : out.distance_series)
        if (t >= 0.9 * T) var = std::max(var, std::abs(d - d_final) / std::max(d_final, 1e-300));
    out.distance_rel_variation_tail = var;

    // diam ~ (T_pred - t)^p with p = 1/2 for a linearly collapsing class
    std::vector<double> xs, ys;
    for (const auto& [t, dm] : out.diameter_series) {
        const double gap = report.T_predicted - t;
        if (gap > 1e-12 && dm > 0.0 && t >= 0.5 * T) {
            xs.push_back(std::log(gap));
            ys.push_back(std::log(dm));
        }
    }
    if (xs.size() >= 2) out.diameter_exponent_dev = std::abs(linear_fit(xs, ys).slope - 0.5);
    return out;
}

} // namespace hermflow

