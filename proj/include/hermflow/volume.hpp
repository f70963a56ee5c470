#pragma once

// Monge-Ampere volume functionals: one-sided bounds for the sup/inf of
// int (theta + ddc phi)^n over admissible potentials, the epsilon-regularized
// lower functional for nef forms, the Guan-Li closedness test, and the
// Gauduchon factor.

#include <cstdint>
#include <utility>
#include <vector>

#include "hermflow/calculus.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

double ma_volume(const OneOneForm& theta, const ScalarField& phi);

struct SamplerConfig {
    int n_samples = 50;
    std::uint64_t seed = 1;
    int refine_iters = 40;
    double margin_frac = 0.1; // keep margin above this fraction of the base margin
    int modes = 6;            // random modes per sample
};

struct VolumeReport {
    double v_plus_lower = 0.0;
    double v_minus_upper = 0.0;
    int n_samples = 0;
    std::vector<double> sample_volumes;
    std::vector<std::pair<int, double>> optimizer_trace; // (step, value) for both refinements
};

VolumeReport estimate_v_bounds(const OneOneForm& theta, const OneOneForm& omega_ref,
                               const SamplerConfig& cfg);

struct VHatReport {
    std::vector<std::pair<double, double>> epsilon_ladder; // (eps, v_minus_upper)
    double extrapolated = 0.0;
};

VHatReport v_hat_minus(const OneOneForm& theta, const OneOneForm& omega_ref,
                       const std::vector<double>& eps_ladder, const SamplerConfig& cfg);

struct GuanLiResult {
    bool pass = false;
    double residual = 0.0;
};

// Radial residual |a'' - b'|_inf; spectral ddc-closedness residual on tori.
GuanLiResult guan_li_check(const OneOneForm& omega);

// Solves (e^G a)'' = (e^G b)' on radial models (G = 0 on tori and for
// Gauduchon metrics), normalized to mean zero.
ScalarField gauduchon_factor(const OneOneForm& omega);

// Random admissible potential, rescaled so the margin of theta + ddc(phi)
// against omega_ref stays above margin_frac times the base margin.
ScalarField sample_admissible_potential(const OneOneForm& theta, const OneOneForm& omega_ref,
                                        std::uint64_t seed, const SamplerConfig& cfg);

} // namespace hermflow
