#pragma once

// Test-only oracles, independent of the implementation paths they check:
//  - Monte Carlo estimates of the radial transverse constants from raw
//    coordinate formulas on C^2 \ {0};
//  - a spectral periodic Poisson solver for the dimension-one MA equation;
//  - a brute-force obstacle-problem oracle (multi-start policy iteration on
//    the x-reduced grid).

#include <cstdint>
#include <vector>

#include "hermflow/geometry.hpp"

namespace hermflow::oracle {

// Estimates int over {1 <= |z| <= 2} of ddc(rho) ^ drho ^ dc(rho) divided by
// the rho-length of the annulus.
double mc_transverse_volume(std::size_t samples, std::uint64_t seed);

// Estimates the area of P^1 under ddc(rho) (Fubini-Study mass).
double mc_exceptional_area(std::size_t samples, std::uint64_t seed);

// Pointwise check of the radial frame formula ddc(omega) = (a'' - b') V for a
// radial form on the Hopf model, via finite differences of the raw coordinate
// coefficients at random points; returns the max absolute deviation.
double mc_radial_ddc_form_residual(const std::vector<double>& a_coeff_of_rho_poly,
                                   const std::vector<double>& b_coeff_of_rho_poly,
                                   std::size_t samples, std::uint64_t seed);

// Mean-zero spectral solution of Lap(phi) = g on Torus1 (g must have zero
// mean); the dimension-one MA equation reduces to it.
ScalarField poisson_torus1(const ScalarField& g);

// Largest phi <= f with dens_theta + Lap_fd(phi)/2 >= 0 on the x-reduced
// Torus1 grid, by policy iteration from a given initial active set.  Returns
// the x-profile (length nx).
std::vector<double> envelope_policy_iteration(const std::vector<double>& theta_dens,
                                              const std::vector<double>& f, double period,
                                              std::vector<char> active_init, int max_iters = 80);

} // namespace hermflow::oracle
