#pragma once

// Linearized solves shared by the elliptic, envelope, and flow Newton loops.
//
// The linearization of every log-Monge-Ampere residual in this project is
//   L(delta) = alpha*delta + ctr * tr_omega(ddc delta) + zdiag .* delta,
// with omega the current metric.  On BlowupCalabi the end rows are replaced by
// the Neumann rows (D1 delta at the interval ends) matching the residual
// convention there.  `bordered` appends the mean-zero constraint and a
// constant column on the PDE rows; it is used by the pure-trace solves whose
// operator annihilates constants.
//
// Dispatch: BlowupCalabi assembles a banded matrix (dense when bordered);
// Hopf and the tori run GMRES with a constant-coefficient spectral
// preconditioner.

#include <vector>

#include "hermflow/calculus.hpp"
#include "hermflow/geometry.hpp"

namespace hermflow {

struct TraceOperator {
    const OneOneForm* omega = nullptr;
    double alpha = 0.0;
    double ctr = 1.0;
    const std::vector<double>* zdiag = nullptr;
    bool bordered = false;
};

// Solves L(delta) = rhs; when bordered, also reports the constant-column
// multiplier (the inner correction absorbed by the caller's c-update).
std::vector<double> solve_trace_system(const TraceOperator& op, const std::vector<double>& rhs,
                                       double* mu_out = nullptr);

// On BlowupCalabi, overwrite the end entries of a residual vector with the
// Neumann rows D1(phi) at the interval ends.  No-op on other geometries.
void apply_radial_bc_rows(const GeometryPtr& g, const std::vector<double>& phi, std::vector<double>& r);

// Pointwise positivity on the collocation nodes (all nodes except the
// BlowupCalabi interval ends, which carry the Neumann rows).
bool collocation_positive(const OneOneForm& omega);

// Per-row stencil tables for the 4th-order non-periodic derivative and its
// square, used for banded assembly on BlowupCalabi.
struct RadialStencils {
    std::vector<int> start1, start2;
    std::vector<std::vector<double>> row1, row2;
};
RadialStencils radial_stencils(int n, double h);

double sup_norm(const std::vector<double>& v);
double mean_of(const std::vector<double>& v);

} // namespace hermflow
