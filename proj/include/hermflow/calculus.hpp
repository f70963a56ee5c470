#pragma once

// Discrete (1,1)-form calculus on the model geometries: ddc, wedge products,
// integration, positivity and trace, Chern-Ricci forms, restricted volumes.
//
// Conventions (documented against dc = (i/2)(dbar - d), ddc = i d dbar):
//   Torus1:  alpha = i a dz^dzbar; volume densities are relative to dx^dy,
//            so density(alpha) = 2a and ddc(u) has density Lap(u)/2.
//   Torus2:  alpha = i sum A_jk dz^j^dzbar^k with A Hermitian; densities are
//            relative to V4 = (i dz1^dzbar1)^(i dz2^dzbar2), so
//            alpha^beta has density A11 B22 + A22 B11 - 2 Re(A12 conj(B12))
//            and the reference volume is normalized so integrate(omega_X^2)=1.
//   Radial:  alpha = a ddc(rho) + b drho^dc(rho); alpha^beta has density
//            (a d + b c) relative to V = ddc(rho)^drho^dc(rho), and
//            integrate multiplies the rho-integral by the transverse constant.

#include <vector>

#include "hermflow/geometry.hpp"

namespace hermflow {

// Integral of ddc(rho)^drho^dc(rho) over the transverse directions: the
// rho-slab integral of V equals this constant times the rho-length.
// Closed value 4*pi^2, cross-checked by a Monte Carlo oracle in the tests.
inline constexpr double kRadialTransverseVolume = 39.47841760435743447533796399951;

// Area of the exceptional P^1 fiber under ddc(rho): 2*pi, same oracle.
inline constexpr double kExceptionalCurveArea = 6.28318530717958647692528676656;

// First/second rho-derivatives on radial geometries (Hopf: spectral periodic;
// BlowupCalabi: 4th-order finite differences with one-sided end stencils).
std::vector<double> radial_d1(const GeometryPtr& g, const std::vector<double>& u);
std::vector<double> radial_d2(const GeometryPtr& g, const std::vector<double>& u);

// 2nd-order local variants (cross-check operator, also used where pointwise
// maxima make spectral differentiation ring).
std::vector<double> radial_d1_fd(const GeometryPtr& g, const std::vector<double>& u);
std::vector<double> radial_d2_fd(const GeometryPtr& g, const std::vector<double>& u);

OneOneForm ddc(const ScalarField& u);
OneOneForm ddc_fd(const ScalarField& u);

OneOneForm add_ddc(const OneOneForm& theta, const ScalarField& phi);

VolumeDensity wedge_top(const std::vector<const OneOneForm*>& forms);
VolumeDensity wedge_top(const OneOneForm& a);
VolumeDensity wedge_top(const OneOneForm& a, const OneOneForm& b);
// alpha^n for n = complex dimension.
VolumeDensity ma_density(const OneOneForm& omega);

double integrate(const VolumeDensity& d);

// Smallest generalized eigenvalue of alpha against omega_ref, per node.
std::vector<double> pointwise_margin(const OneOneForm& alpha, const OneOneForm& omega_ref);
double positivity_margin(const OneOneForm& alpha, const OneOneForm& omega_ref);

bool is_positive(const OneOneForm& omega);

OneOneForm ricci_form(const OneOneForm& omega);

ScalarField trace_form(const OneOneForm& alpha, const OneOneForm& omega);

ScalarField scalar_curvature(const OneOneForm& omega);

double restricted_volume(const OneOneForm& omega, const SubvarietyTag& tag);

ScalarField max_glue(const ScalarField& phi1, const ScalarField& phi2);

// Density of ddc(omega) relative to the geometry volume element (identically
// zero in complex dimension 1; (D2 a - D1 b) on radial models).
std::vector<double> ddc_form_density(const OneOneForm& omega);

// Max absolute coefficient, for relative tolerances.
double form_scale(const OneOneForm& omega);

// Centered periodic finite difference of order 1 or 2 along one torus axis.
std::vector<double> torus_axis_diff(const GeometryPtr& g, const std::vector<double>& v, int axis, int order);

} // namespace hermflow
