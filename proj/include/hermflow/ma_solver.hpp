#pragma once

// Elliptic complex Monge-Ampere solver:
//   (theta + ddc phi)^n = c f omega_ref^n,  sup phi = 0,
// with the constant c determined by the mass identity and a damped Newton
// iteration on the log-form residual.  The continuity path solves along a
// decreasing ladder theta + t*omega_ref with warm starts, for nef classes
// that degenerate at t = 0.

#include <cstdint>
#include <utility>
#include <vector>

#include "hermflow/calculus.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

struct SolveReport {
    ScalarField phi;
    double c = 1.0;
    double residual_linf = 0.0;
    int iterations = 0;
    double positivity_margin_final = 0.0;
    bool converged = false;
};

struct MaOptions {
    int max_iter = 60;
    int max_halvings = 40;
    const ScalarField* warm_start = nullptr;
};

SolveReport solve_ma(const OneOneForm& theta, const ScalarField& f, const OneOneForm& omega_ref,
                     double tol, const MaOptions& opts = {});

struct ContinuityPathReport {
    std::vector<std::pair<double, SolveReport>> ladder;
    ScalarField limit_phi;
    std::vector<std::uint8_t> singular_region_estimate;
    double envelope_C = 0.0; // fitted trace envelope tr <= C * exp(-A * rho_sing)
    double envelope_A = 0.0;
};

ContinuityPathReport continuity_path(const OneOneForm& theta, const ScalarField& f,
                                     const OneOneForm& omega_ref, const std::vector<double>& t_ladder,
                                     double tol, const MaOptions& opts = {});

struct CBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool pass = false;
};

// Upper bound from the integrated arithmetic-geometric inequality against the
// Gauduchon-twisted reference volume; lower bound from the class mass ratio.
CBounds c_bounds_check(const SolveReport& report, const OneOneForm& theta, const ScalarField& f,
                       const OneOneForm& omega_ref, const ScalarField& gauduchon_G);

// Model singularity potential: zero on tori/Hopf, min(rho - (rho_min + 1), 0)
// on BlowupCalabi.
ScalarField singularity_potential(const GeometryPtr& g);

} // namespace hermflow
