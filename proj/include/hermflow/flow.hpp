#pragma once

// Chern-Ricci flow in its scalar reduction
//   d(phi)/dt = log( (theta_t + ddc phi)^n / omega_0^n ),  theta_t = omega_0 - t Ric(omega_0),
// integrated by an implicit trapezoidal rule with Newton inner solves and
// adaptive step halving.  The driver records trajectory diagnostics, the
// maximal-time estimate (margin collapse) and prediction (class-level
// feasibility), singularity masks, restricted-volume traces, and the
// a-priori-bound fits.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hermflow/calculus.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

struct FlowThresholds {
    double curvature = 50.0;       // Sigma' membership: |R| exceeded at some time
    double z_margin_ratio = 0.05;  // Z membership: final pointwise margin against omega_0
    double z_rate_factor = 100.0;  // Z membership: Cauchy rate above this multiple of the quiet floor
    int cauchy_window = 8;         // samples in the smooth-convergence test
    double e_neighborhood = 0.3;   // rho-width of the exceptional-curve neighborhood
};

struct FlowOptions {
    double dt_initial = 5e-3;
    double dt_min = 1e-7;
    double dt_max = 2e-2;
    double margin_floor = 1e-6;
    double t_max = 1.0;
    double newton_tol = 1e-10;
    int max_steps = 200000;
    int max_newton = 30;
};

struct FlowState {
    double t = 0.0;
    ScalarField phi;
    ScalarField phi_dot;
    OneOneForm omega_t;
    ScalarField scalar_curvature;
    double margin = 0.0;
    double dt_next = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    double dt = 0.0;
    double sup_R = 0.0;
    double margin = 0.0;
    double volume = 0.0;
    double sup_phi = 0.0;
    double sup_abs_phi_dot = 0.0;
    // Lemma-style bound witnesses against the singularity potential.
    double phi_lower_gap = 0.0; // sup (rho_sing - phi)
    double dot_lower_gap = 0.0; // sup phi_dot / (rho_sing - 1)
    std::vector<double> restricted; // per tracked subvariety
};

struct FlowReport {
    GeometryPtr geo;
    OneOneForm omega0;
    OneOneForm ricci0;
    std::vector<TrajectorySample> trajectory;
    double T_estimate = 0.0;
    double T_predicted = 0.0;
    bool blowup_detected = false;
    bool hit_time_cap = false;
    ScalarField limit_potential;
    OneOneForm omega_final;

    // masks filled by singularity_report
    std::vector<std::uint8_t> singular_mask; // Z
    std::vector<std::uint8_t> sigma_mask;    // Sigma'
    double jaccard_z_sigma = 0.0;
    double jaccard_z_eneigh = 0.0;

    // internals for the diagnostics passes
    std::deque<std::pair<double, ScalarField>> ring; // last K accepted (t, phi)
    std::vector<double> rmax_field;                  // running max |R| per node
    std::vector<double> final_margin_field;          // pointwise margin of omega(T-) against omega0
    std::vector<std::pair<double, ScalarField>> phi_samples; // radial geometries: phi per sample
};

// theta_t from a cached Ricci form.
OneOneForm theta_t_form(const OneOneForm& omega0, const OneOneForm& ricci0, double t);

// One implicit trapezoidal step with internal dt halving; throws StepFailure
// when dt reaches dt_min (interpreted by the driver as reaching T).
FlowState flow_step(const FlowState& state, const OneOneForm& omega0, const OneOneForm& ricci0,
                    double dt, const FlowOptions& opts);

FlowReport run_flow(const OneOneForm& omega0, const FlowOptions& opts, const FlowThresholds& thresholds);

// Class-level feasibility prediction of the maximal time (bisection on the
// discretized positivity test; bracket cap for the exact torus classes).
double predicted_maximal_time(const OneOneForm& omega0, const OneOneForm& ricci0, double t_hi);

// Runs the flow and returns (T_estimate, T_predicted).
std::pair<double, double> maximal_time(const OneOneForm& omega0, double t_lo, double t_hi,
                                       const FlowOptions& opts);

struct SingularityDiagnostics {
    std::vector<std::pair<double, double>> sup_R_series; // (t, sup|R|)
    double trace_envelope_C = 0.0;
    double trace_envelope_A = 0.0;
    double phi_bound_C = 0.0;     // Lemma-style: C >= phi >= rho_sing - C
    double phi_dot_bound_C = 0.0; // C >= phi_dot >= C rho_sing - C
    double z_rate_threshold = 0.0;
};

// Fills the masks in the report and returns the diagnostics.
SingularityDiagnostics singularity_report(FlowReport& report, const FlowThresholds& thresholds);

enum class NullLocusKind { ConsistentTrivial, Consistent, OutOfHypothesis, Inconsistent };

struct NullLocusVerdict {
    NullLocusKind kind = NullLocusKind::ConsistentTrivial;
    std::vector<std::string> collapsing; // tracked subvarieties with vanishing restricted volume
    double volume_ratio_final = 1.0;     // total volume vs initial
    double exceptional_slope = 0.0;      // fitted tail slope of the E-trace
    double exceptional_pairing = 0.0;    // Ricci class pairing on E
    double slope_rel_dev = 0.0;
    double jaccard_mask_vs_neighborhood = 0.0;
    std::string note;
};

NullLocusVerdict null_locus_comparison(const FlowReport& report, const FlowThresholds& thresholds);

struct AprioriFits {
    double phi_C = 0.0;
    double phi_dot_C = 0.0;
    double trace_C = 0.0;
    double trace_A = 0.0;
};

AprioriFits fit_apriori_bounds(const FlowReport& report);

// Ratio test used by the stability acceptance: every fitted constant within a
// factor two across runs.
bool fits_stable(const AprioriFits& a, const AprioriFits& b, double factor = 2.0);

struct ContractionProbe {
    std::vector<std::pair<double, double>> distance_series; // (t, d(p,q))
    std::vector<std::pair<double, double>> diameter_series; // (t, diam of E fiber)
    double initial_distance = 0.0;
    double distance_rel_variation_tail = 0.0; // over the final 10% of [0, T)
    double diameter_exponent_dev = 0.0;       // |fitted diam ~ (T - t)^p exponent - 1/2|
};

ContractionProbe surgical_contraction_probe(const FlowReport& report, double rho_p, double rho_q);

} // namespace hermflow
