#include "hermflow/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hermflow/calculus.hpp"
#include "hermflow/envelope.hpp"
#include "hermflow/errors.hpp"
#include "hermflow/fft.hpp"
#include "hermflow/flow.hpp"
#include "hermflow/ma_solver.hpp"
#include "hermflow/volume.hpp"

namespace hermflow {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> preset_args(const std::string& preset) {
    const auto colon = preset.find(':');
    std::vector<double> out;
    if (colon == std::string::npos) return out;
    std::istringstream is(preset.substr(colon + 1));
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::string preset_name(const std::string& preset) {
    return preset.substr(0, preset.find(':'));
}

// first-coordinate values on a torus grid
std::vector<double> torus_x_coordinate(const GeometryPtr& g) {
    std::vector<double> x(g->node_count());
    const auto& dims = g->grid;
    std::size_t inner = 1;
    for (std::size_t a = 1; a < dims.size(); ++a) inner *= static_cast<std::size_t>(dims[a]);
    for (std::size_t m = 0; m < x.size(); ++m)
        x[m] = static_cast<double>(m / inner) / dims[0];
    return x;
}

} // namespace

ScalarField resolve_scalar_preset(const std::string& preset, const GeometryPtr& g) {
    const std::string name = preset_name(preset);
    const auto args = preset_args(preset);
    ScalarField f(g, 0.0);

    if (name == "one") {
        for (auto& v : f.values) v = 1.0;
        return f;
    }
    if (name == "zero") return f;
    if (name == "const") {
        if (args.size() != 1) throw ConfigError("const:<K> preset needs one number");
        for (auto& v : f.values) v = args[0];
        return f;
    }
    if (name == "cosx") {
        if (g->is_radial()) throw ConfigError("cosx preset needs a torus geometry");
        if (args.size() != 1) throw ConfigError("cosx:<amp> preset needs one number");
        const auto x = torus_x_coordinate(g);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + args[0] * std::cos(kTwoPi * x[i]);
        return f;
    }
    if (name == "sinrho") {
        if (!g->is_radial()) throw ConfigError("sinrho preset needs a radial geometry");
        if (args.size() != 1) throw ConfigError("sinrho:<amp> preset needs one number");
        const double L = g->kind == GeometryKind::Hopf ? g->period : g->rho_max - g->rho_min;
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + args[0] * std::sin(kTwoPi * g->rho(i) / L);
        return f;
    }
    if (name == "dip") {
        // obstacle: -A * exp(kappa (cos(2 pi (x - x0)) - 1))
        if (g->kind != GeometryKind::Torus1) throw ConfigError("dip preset needs torus1");
        if (args.size() != 3) throw ConfigError("dip:<A>,<kappa>,<x0> preset needs three numbers");
        const auto x = torus_x_coordinate(g);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = -args[0] * std::exp(args[1] * (std::cos(kTwoPi * (x[i] - args[2])) - 1.0));
        return f;
    }
    if (name == "obstacle") {
        // Obstacle built from a prescribed density profile: the density of
        // theta + ddc f equals 1 + lift away from x0 and dips to -depth in a
        // window of sharpness kappa (von Mises), recentred to unit mean; the
        // obstacle is its periodic second antiderivative, f = 2 Lap^-1(D - 1).
        if (g->kind != GeometryKind::Torus1) throw ConfigError("obstacle preset needs torus1");
        if (args.size() != 4) throw ConfigError("obstacle:<depth>,<kappa>,<x0>,<lift> needs four numbers");
        const auto x = torus_x_coordinate(g);
        std::vector<double> d(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            d[i] = (1.0 + args[3]) - (1.0 + args[3] + args[0]) *
                                         std::exp(args[1] * (std::cos(kTwoPi * (x[i] - args[2])) - 1.0));
        // spectral inverse Laplacian of the mean-zero part
        auto z = spectral::fft_all(d, g->grid);
        std::size_t m = 0;
        for (int kx = 0; kx < g->grid[0]; ++kx)
            for (int ky = 0; ky < g->grid[1]; ++ky, ++m) {
                const double wx = kTwoPi * spectral::signed_mode(kx, g->grid[0]);
                const double wy = kTwoPi * spectral::signed_mode(ky, g->grid[1]);
                const double w2 = wx * wx + wy * wy;
                z[m] = w2 > 0.0 ? 2.0 * (z[m] / -w2) : 0.0;
            }
        f.values = spectral::ifft_all_real(std::move(z), g->grid);
        return f;
    }
    if (name == "plateau") {
        // Obstacle from a flat-bottomed density window with steep smooth
        // walls: D = (1+lift) - (1+lift+depth) * sigmoid((cos(2 pi (x-x0)) -
        // cos(pi width)) / sharp); the obstacle is f = 2 Lap^-1(D - 1).
        if (g->kind != GeometryKind::Torus1) throw ConfigError("plateau preset needs torus1");
        if (args.size() != 5) throw ConfigError("plateau:<depth>,<width>,<sharp>,<x0>,<lift> needs five numbers");
        const auto x = torus_x_coordinate(g);
        const double cw = std::cos(std::numbers::pi * args[1]);
        std::vector<double> d(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double t = (std::cos(kTwoPi * (x[i] - args[3])) - cw) / args[2];
            const double sig = 1.0 / (1.0 + std::exp(-t));
            d[i] = (1.0 + args[4]) - (1.0 + args[4] + args[0]) * sig;
        }
        auto z = spectral::fft_all(d, g->grid);
        std::size_t m = 0;
        for (int kx = 0; kx < g->grid[0]; ++kx)
            for (int ky = 0; ky < g->grid[1]; ++ky, ++m) {
                const double wx = kTwoPi * spectral::signed_mode(kx, g->grid[0]);
                const double wy = kTwoPi * spectral::signed_mode(ky, g->grid[1]);
                const double w2 = wx * wx + wy * wy;
                z[m] = w2 > 0.0 ? 2.0 * (z[m] / -w2) : 0.0;
            }
        f.values = spectral::ifft_all_real(std::move(z), g->grid);
        return f;
    }
    throw ConfigError("unknown scalar preset '" + preset + "'");
}

OneOneForm resolve_form_preset(const std::string& preset, const GeometryPtr& g) {
    const std::string name = preset_name(preset);
    const auto args = preset_args(preset);

    if (name == "reference") return reference_metric(g);
    if (name == "scale") {
        if (args.size() != 1) throw ConfigError("scale:<s> preset needs one number");
        return args[0] * reference_metric(g);
    }
    if (name == "pair") {
        if (!g->is_radial()) throw ConfigError("pair preset needs a radial geometry");
        if (args.size() != 2) throw ConfigError("pair:<a>,<b> preset needs two numbers");
        return OneOneForm::radial_constant(g, args[0], args[1]);
    }
    if (name == "diag") {
        if (g->kind != GeometryKind::Torus2) throw ConfigError("diag preset needs torus2");
        if (args.size() != 2) throw ConfigError("diag:<d1>,<d2> preset needs two numbers");
        return OneOneForm::torus2_diag(g, args[0], args[1]);
    }
    if (name == "conformal") {
        if (g->kind != GeometryKind::Hopf) throw ConfigError("conformal preset needs hopf");
        if (args.size() != 1) throw ConfigError("conformal:<amp> preset needs one number");
        OneOneForm f = reference_metric(g);
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            const double e = std::exp(args[0] * std::sin(kTwoPi * g->rho(i) / g->period));
            f.comps[0][i] *= e;
            f.comps[1][i] *= e;
        }
        return f;
    }
    if (name == "degenerate-exceptional") {
        if (g->kind != GeometryKind::BlowupCalabi) throw ConfigError("degenerate-exceptional needs blowup-calabi");
        OneOneForm f = OneOneForm::zero(g);
        const double upp = g->slope_line / (g->rho_max - g->rho_min);
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            f.comps[0][i] = upp * (g->rho(i) - g->rho_min);
            f.comps[1][i] = upp;
        }
        return f;
    }
    if (name == "reference+ddc") {
        const auto colon = preset.find(':');
        const ScalarField u = resolve_scalar_preset(preset.substr(colon + 1), g);
        return add_ddc(reference_metric(g), u);
    }
    throw ConfigError("unknown form preset '" + preset + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

struct RunWriter {
    fs::path dir;
    json manifest;
    std::vector<std::string> outputs;
    std::vector<json> stages;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit RunWriter(const ExperimentConfig& cfg) : dir(cfg.out_dir) {
        fs::create_directories(dir);
        manifest["config_hash"] = format_hash(cfg);
        manifest["seed"] = cfg.seed;
        manifest["tool_version"] = kToolVersion;
        manifest["experiment"] = to_string(cfg.kind);
    }

    static std::string format_hash(const ExperimentConfig& cfg) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a_hash(cfg.raw.dump())));
        return buf;
    }

    void stage(const std::string& name, const std::string& status) {
        stages.push_back({{"name", name}, {"status", status}});
    }

    // The manifest lands on disk before any result file.
    void write_manifest() {
        manifest["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["stages"] = stages;
        manifest["outputs"] = outputs;
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
    }

    void write_json(const std::string& name, const json& j) {
        std::ofstream f(dir / name);
        f << j.dump(2) << "\n";
        outputs.push_back((dir / name).string());
    }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
        std::ofstream f(dir / name);
        for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
        f << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
            f << "\n";
        }
        outputs.push_back((dir / name).string());
    }
};

std::vector<std::vector<double>> field_rows(const ScalarField& u) {
    const GeometryPtr g = u.geo;
    std::vector<std::vector<double>> rows;
    rows.reserve(u.size());
    if (g->is_radial()) {
        for (std::size_t i = 0; i < u.size(); ++i) rows.push_back({g->rho(i), u[i]});
        return rows;
    }
    const auto& dims = g->grid;
    std::vector<int> idx(dims.size(), 0);
    for (std::size_t m = 0; m < u.size(); ++m) {
        std::vector<double> row;
        for (std::size_t a = 0; a < dims.size(); ++a)
            row.push_back(static_cast<double>(idx[a]) / dims[a]);
        row.push_back(u[m]);
        rows.push_back(std::move(row));
        for (std::size_t a = dims.size(); a-- > 0;) {
            if (++idx[a] < dims[a]) break;
            idx[a] = 0;
        }
    }
    return rows;
}

std::vector<std::string> field_header(const GeometryPtr& g, const std::string& value_name) {
    if (g->is_radial()) return {"rho", value_name};
    std::vector<std::string> h;
    for (std::size_t a = 0; a < g->grid.size(); ++a) h.push_back("x" + std::to_string(a));
    h.push_back(value_name);
    return h;
}

FlowOptions flow_options_from(const ExperimentConfig& cfg) {
    FlowOptions o;
    o.dt_initial = cfg.dt_initial;
    o.dt_min = cfg.dt_min;
    o.dt_max = cfg.dt_max;
    o.margin_floor = cfg.margin_floor;
    o.t_max = cfg.t_max;
    o.newton_tol = cfg.tol;
    return o;
}

FlowThresholds thresholds_from(const ExperimentConfig& cfg) {
    FlowThresholds t;
    t.curvature = cfg.curvature_threshold;
    t.z_margin_ratio = cfg.z_margin_ratio;
    t.z_rate_factor = cfg.z_rate_factor;
    t.cauchy_window = cfg.cauchy_window;
    t.e_neighborhood = cfg.e_neighborhood;
    return t;
}

void run_solve_ma(const ExperimentConfig& cfg, RunWriter& w, std::ostream& log) {
    const GeometryPtr g = cfg.geometry;
    const OneOneForm theta = resolve_form_preset(cfg.theta_preset, g);
    const ScalarField f = resolve_scalar_preset(cfg.f_preset, g);
    const OneOneForm omega_ref = reference_metric(g);

    json rep;
    ScalarField phi;
    if (!cfg.t_ladder.empty()) {
        const auto path = continuity_path(theta, f, omega_ref, cfg.t_ladder, cfg.tol);
        json rungs = json::array();
        for (const auto& [t, r] : path.ladder)
            rungs.push_back({{"t", t},
                             {"c", r.c},
                             {"residual_linf", r.residual_linf},
                             {"iterations", r.iterations},
                             {"positivity_margin", r.positivity_margin_final},
                             {"converged", r.converged}});
        rep["ladder"] = rungs;
        rep["envelope_C"] = path.envelope_C;
        rep["envelope_A"] = path.envelope_A;
        std::size_t flagged = 0;
        for (auto b : path.singular_region_estimate) flagged += b;
        rep["singular_nodes"] = flagged;
        phi = path.limit_phi;
        w.stage("continuity-path", "ok");
    } else {
        const auto r = solve_ma(theta, f, omega_ref, cfg.tol);
        rep["c"] = r.c;
        rep["residual_linf"] = r.residual_linf;
        rep["iterations"] = r.iterations;
        rep["positivity_margin"] = r.positivity_margin_final;
        rep["converged"] = r.converged;
        const double mass =
            integrate(ma_density(add_ddc(theta, r.phi)));
        VolumeDensity fw(g, std::vector<double>(g->node_count()));
        const auto ref_dens = ma_density(omega_ref);
        for (std::size_t i = 0; i < fw.values.size(); ++i) fw.values[i] = f[i] * ref_dens.values[i];
        rep["mass_identity_gap"] = std::abs(mass - r.c * integrate(fw)) / std::abs(mass);
        phi = r.phi;
        log << "solve-ma: c = " << r.c << ", residual = " << r.residual_linf << "\n";
        w.stage("solve", "ok");
    }
    w.write_manifest();
    w.write_json("report.json", rep);
    if (cfg.write_phi) w.write_csv("phi.csv", field_header(g, "phi"), field_rows(phi));
}

void run_envelope(const ExperimentConfig& cfg, RunWriter& w, std::ostream& log) {
    const GeometryPtr g = cfg.geometry;
    const OneOneForm theta = resolve_form_preset(cfg.theta_preset, g);
    const ScalarField f = resolve_scalar_preset(cfg.f_preset, g);
    const OneOneForm omega_ref = reference_metric(g);

    std::vector<double> betas = cfg.betas;
    if (betas.empty()) betas = {16, 32, 64, 128, 256, 512, 1024};

    BetaLadderOptions opts;
    opts.inner.tol = cfg.tol;
    if (g->kind == GeometryKind::BlowupCalabi) opts.rho_cut = g->rho_min + 1.0;
    const auto fam = beta_ladder(theta, f, omega_ref, betas, opts);

    const double tol = default_contact_tolerance(g, f);
    const auto contact = contact_ma_concentration(theta, fam.envelope_estimate, f, omega_ref, tol);

    json rep;
    json rungs = json::array();
    for (const auto& r : fam.ladder)
        rungs.push_back({{"beta", r.beta}, {"error_vs_envelope", r.error_vs_envelope}});
    rep["ladder"] = rungs;
    rep["rate_fit_C"] = fam.rate_fit.C;
    rep["rate_fit_ok"] = fam.rate_fit.exponent_ok;
    rep["oracle_used"] = fam.oracle_used;
    rep["contact_tolerance"] = contact.contact.tolerance;
    rep["off_mass_fraction"] = contact.off_mass_fraction;
    rep["degenerate_total_mass"] = contact.degenerate_total_mass;
    log << "envelope: top error = " << fam.ladder.back().error_vs_envelope
        << ", off-mass = " << contact.off_mass_fraction << "\n";
    w.stage("beta-ladder", "ok");
    w.write_manifest();
    w.write_json("report.json", rep);

    std::vector<std::string> header = field_header(g, "f");
    for (const auto& r : fam.ladder) header.push_back("phi_beta_" + std::to_string(static_cast<long>(r.beta)));
    header.push_back("envelope");
    auto rows = field_rows(f);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& r : fam.ladder) rows[i].push_back(r.phi[i]);
        rows[i].push_back(fam.envelope_estimate[i]);
    }
    w.write_csv("envelope.csv", header, rows);
}

void write_flow_outputs(const ExperimentConfig& cfg, RunWriter& w, const FlowReport& rep,
                        const SingularityDiagnostics& diag, json extra) {
    const GeometryPtr g = cfg.geometry;
    json j = std::move(extra);
    j["T_estimate"] = rep.T_estimate;
    j["T_predicted"] = rep.T_predicted;
    j["blowup_detected"] = rep.blowup_detected;
    j["hit_time_cap"] = rep.hit_time_cap;
    double supR = 0.0;
    for (const auto& [t, r] : diag.sup_R_series) supR = std::max(supR, r);
    j["sup_R_max"] = supR;
    std::size_t zc = 0, sc = 0;
    for (auto b : rep.singular_mask) zc += b;
    for (auto b : rep.sigma_mask) sc += b;
    j["z_mask_nodes"] = zc;
    j["sigma_mask_nodes"] = sc;
    j["jaccard_z_sigma"] = rep.jaccard_z_sigma;
    j["jaccard_z_eneighborhood"] = rep.jaccard_z_eneigh;
    j["phi_bound_C"] = diag.phi_bound_C;
    j["phi_dot_bound_C"] = diag.phi_dot_bound_C;
    j["trace_envelope_C"] = diag.trace_envelope_C;
    j["trace_envelope_A"] = diag.trace_envelope_A;
    j["z_rate_threshold"] = diag.z_rate_threshold;
    j["volume_initial"] = rep.trajectory.front().volume;
    j["volume_final"] = rep.trajectory.back().volume;

    w.write_manifest();
    w.write_json("report.json", j);

    std::vector<std::string> header = {"t",       "dt",     "sup_R",          "margin",
                                       "volume",  "sup_phi", "sup_abs_phi_dot"};
    for (const auto& tag : g->tracked) header.push_back("vol_" + tag.name);
    std::vector<std::vector<double>> rows;
    for (const auto& s : rep.trajectory) {
        std::vector<double> row = {s.t, s.dt, s.sup_R, s.margin, s.volume, s.sup_phi, s.sup_abs_phi_dot};
        for (double v : s.restricted) row.push_back(v);
        rows.push_back(std::move(row));
    }
    w.write_csv("trajectory.csv", header, rows);

    if (g->is_radial()) {
        std::vector<std::vector<double>> mrows;
        for (std::size_t i = 0; i < g->node_count(); ++i)
            mrows.push_back({g->rho(i), static_cast<double>(rep.singular_mask[i]),
                             static_cast<double>(rep.sigma_mask[i]), rep.final_margin_field[i]});
        w.write_csv("masks.csv", {"rho", "z_mask", "sigma_mask", "final_margin"}, mrows);
    }
    if (cfg.write_phi && g->node_count() <= 100000)
        w.write_csv("phi_final.csv", field_header(g, "phi"), field_rows(rep.limit_potential));
}

void run_flow_experiment(const ExperimentConfig& cfg, RunWriter& w, std::ostream& log, bool with_null_locus) {
    const GeometryPtr g = cfg.geometry;
    const OneOneForm omega0 = resolve_form_preset(cfg.omega0_preset, g);
    auto rep = run_flow(omega0, flow_options_from(cfg), thresholds_from(cfg));
    w.stage("flow", "ok");
    const auto diag = singularity_report(rep, thresholds_from(cfg));
    w.stage("singularity-report", "ok");

    json extra;
    if (with_null_locus) {
        const auto verdict = null_locus_comparison(rep, thresholds_from(cfg));
        json v;
        switch (verdict.kind) {
            case NullLocusKind::ConsistentTrivial: v["kind"] = "consistent-trivial"; break;
            case NullLocusKind::Consistent: v["kind"] = "consistent"; break;
            case NullLocusKind::OutOfHypothesis: v["kind"] = "out-of-hypothesis"; break;
            case NullLocusKind::Inconsistent: v["kind"] = "inconsistent"; break;
        }
        v["collapsing"] = verdict.collapsing;
        v["volume_ratio_final"] = verdict.volume_ratio_final;
        v["exceptional_slope"] = verdict.exceptional_slope;
        v["exceptional_pairing"] = verdict.exceptional_pairing;
        v["slope_rel_dev"] = verdict.slope_rel_dev;
        v["note"] = verdict.note;
        extra["null_locus"] = v;
        w.stage("null-locus", "ok");

        if (g->kind == GeometryKind::BlowupCalabi) {
            const auto probe = surgical_contraction_probe(rep, cfg.probe_rho_p, cfg.probe_rho_q);
            extra["probe"] = {{"initial_distance", probe.initial_distance},
                              {"distance_rel_variation_tail", probe.distance_rel_variation_tail},
                              {"diameter_exponent_dev", probe.diameter_exponent_dev},
                              {"final_diameter", probe.diameter_series.back().second}};
            w.stage("contraction-probe", "ok");
        }
    }
    log << "flow: T_estimate = " << rep.T_estimate << ", T_predicted = " << rep.T_predicted << "\n";
    write_flow_outputs(cfg, w, rep, diag, std::move(extra));
}

void run_volume(const ExperimentConfig& cfg, RunWriter& w, std::ostream& log) {
    const GeometryPtr g = cfg.geometry;
    const OneOneForm theta = resolve_form_preset(cfg.theta_preset, g);
    const OneOneForm omega_ref = reference_metric(g);

    SamplerConfig sampler;
    sampler.n_samples = cfg.samples;
    sampler.seed = cfg.seed;
    sampler.refine_iters = cfg.refine_iters;

    const auto vb = estimate_v_bounds(theta, omega_ref, sampler);
    w.stage("sample", "ok");
    const auto gl = guan_li_check(theta);

    json rep;
    rep["v_plus_lower"] = vb.v_plus_lower;
    rep["v_minus_upper"] = vb.v_minus_upper;
    rep["n_samples"] = vb.n_samples;
    rep["guan_li_pass"] = gl.pass;
    rep["guan_li_residual"] = gl.residual;
    if (g->is_radial()) {
        const ScalarField G = gauduchon_factor(theta);
        rep["gauduchon_sup"] = G.sup_abs();
    }
    if (!cfg.epsilons.empty()) {
        const auto vh = v_hat_minus(theta, omega_ref, cfg.epsilons, sampler);
        json ladder = json::array();
        for (const auto& [e, v] : vh.epsilon_ladder) ladder.push_back({{"epsilon", e}, {"v_minus_upper", v}});
        rep["v_hat_ladder"] = ladder;
        rep["v_hat_extrapolated"] = vh.extrapolated;
        w.stage("v-hat", "ok");
    }
    log << "volume: bounds [" << vb.v_minus_upper << ", " << vb.v_plus_lower << "]\n";
    w.write_manifest();
    w.write_json("report.json", rep);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < vb.sample_volumes.size(); ++i)
        rows.push_back({static_cast<double>(i), vb.sample_volumes[i]});
    w.write_csv("samples.csv", {"sample", "volume"}, rows);
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    RunResult res;
    RunWriter w(cfg);
    try {
        switch (cfg.kind) {
            case ExperimentKind::SolveMa: run_solve_ma(cfg, w, log); break;
            case ExperimentKind::Envelope: run_envelope(cfg, w, log); break;
            case ExperimentKind::Flow: run_flow_experiment(cfg, w, log, false); break;
            case ExperimentKind::NullLocus: run_flow_experiment(cfg, w, log, true); break;
            case ExperimentKind::Volume: run_volume(cfg, w, log); break;
        }
    } catch (const ConfigError& e) {
        w.stage("run", std::string("config error: ") + e.what());
        w.write_manifest();
        res.exit_code = 3;
        res.message = e.what();
        return res;
    } catch (const std::exception& e) {
        w.stage("run", std::string("failed: ") + e.what());
        w.write_manifest();
        res.exit_code = 2;
        res.message = e.what();
        return res;
    }
    res.outputs = w.outputs;
    return res;
}

RunResult run_experiment_file(const std::string& config_path, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_config_file(config_path);
    } catch (const std::exception& e) {
        RunResult res;
        res.exit_code = 3;
        res.message = e.what();
        return res;
    }
    return run_experiment(cfg, log);
}

} // namespace hermflow
