#pragma once

// Plurisubharmonic envelopes via the exponential regularization family
//   (theta + 2^-beta omega_X + ddc phi_beta)^n = e^{beta (phi_beta - f)} omega_X^n,
// together with a projected-SOR obstacle-problem oracle in complex dimension
// one and contact-set concentration diagnostics.

#include <cstdint>
#include <optional>
#include <vector>

#include "hermflow/calculus.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

struct BetaOptions {
    double tol = 1e-10;
    int max_iter = 80;
    int max_halvings = 40;
    const ScalarField* warm_start = nullptr;
};

// The 2^-beta coefficient underflows against theta for large beta and is
// clamped to zero from beta = 50 on; theta must then admit a positive
// representative on the collocation nodes.
double beta_epsilon(double beta);

ScalarField solve_beta(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                       double beta, const BetaOptions& opts = {});

ScalarField envelope_oracle_lcp(const OneOneForm& theta, const ScalarField& f, double tol = 1e-10);

struct BetaRung {
    double beta = 0.0;
    ScalarField phi;
    double residual = 0.0;
    int iterations = 0;
    double error_vs_envelope = 0.0;
};

struct RateFit {
    double C = 0.0;
    bool exponent_ok = false;
    std::vector<double> ratios; // per rung with positive error: err / (C log(beta)/beta)
};

struct BetaFamilyReport {
    std::vector<BetaRung> ladder;
    ScalarField envelope_estimate;
    RateFit rate_fit;
    bool oracle_used = false;
};

struct BetaLadderOptions {
    BetaOptions inner;
    // Optional cutoff: errors measured only on nodes with rho >= rho_cut
    // (BlowupCalabi, away from the exceptional end).
    std::optional<double> rho_cut;
    // Compare against the dimension-one LCP oracle when available.
    bool use_oracle = true;
};

BetaFamilyReport beta_ladder(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                             const std::vector<double>& betas, const BetaLadderOptions& opts = {});

struct ContactSet {
    std::vector<std::uint8_t> mask;
    double tolerance = 0.0;
};

struct ContactReport {
    ContactSet contact;
    double off_mass_fraction = 0.0;
    bool degenerate_total_mass = false;
};

// Mass fractions are measured with the local (finite-difference) ddc so that
// kinked envelopes do not ring.
ContactReport contact_ma_concentration(const OneOneForm& theta, const ScalarField& phi,
                                       const ScalarField& f, const OneOneForm& omega_ref, double tol);

double default_contact_tolerance(const GeometryPtr& g, const ScalarField& f);

struct LaplacianBoundCheck {
    bool pass = false;
    std::vector<double> fitted_C; // per rung in the ladder's top half
};

LaplacianBoundCheck laplacian_bound_check(const BetaFamilyReport& report, const OneOneForm& omega_ref,
                                          const ScalarField& rho_sing, double B);

} // namespace hermflow
