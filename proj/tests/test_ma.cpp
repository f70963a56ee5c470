#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hermflow/calculus.hpp"
#include "hermflow/errors.hpp"
#include "hermflow/ma_solver.hpp"
#include "hermflow/volume.hpp"
#include "oracles.hpp"

using namespace hermflow;
namespace {
constexpr double PI = std::numbers::pi;

ScalarField torus1_density(const GeometryPtr& g, double amp) {
    ScalarField f(g);
    const int nx = g->grid[0], ny = g->grid[1];
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            f.values[static_cast<std::size_t>(i) * ny + j] = 1.0 + amp * std::cos(2.0 * PI * i / nx);
    return f;
}

ScalarField hopf_density(const GeometryPtr& g, double amp) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 1.0 + amp * std::sin(2.0 * PI * g->rho(i) / g->period);
    return f;
}

} // namespace

TEST_CASE("solve_ma: constant density on the flat models is solved by phi = 0, c = 1") {
    for (const auto& g : {make_torus1(32, 8), make_hopf(64)}) {
        const auto theta = reference_metric(g);
        const auto rep = solve_ma(theta, ScalarField(g, 1.0), theta, 1e-10);
        CHECK(rep.converged);
        CHECK(rep.c == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.phi.sup_abs() < 1e-10);
        CHECK(rep.positivity_margin_final > 0.0);
    }
    const auto t2 = make_torus2(8, 8, 8, 8);
    const auto theta2 = reference_metric(t2);
    const auto rep2 = solve_ma(theta2, ScalarField(t2, 1.0), theta2, 1e-10);
    CHECK(rep2.c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep2.phi.sup_abs() < 1e-10);
}

TEST_CASE("solve_ma in dimension one: exact constant and the spectral Poisson solution") {
    const auto g = make_torus1(128, 8);
    const auto theta = reference_metric(g);
    const auto f = torus1_density(g, 0.5);
    const auto rep = solve_ma(theta, f, theta, 1e-11);

    // c = int(theta) / int(f omega) and int cos = 0 exactly on the grid
    CHECK(std::abs(rep.c - 1.0) < 1e-12);

    // phi solves Lap(phi) = 2 (c f - 1); compare with the oracle after the
    // sup normalization
    ScalarField rhs(g);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 2.0 * (rep.c * f[i] - 1.0);
    auto oracle_phi = oracle::poisson_torus1(rhs);
    const double shift = oracle_phi.max();
    for (auto& v : oracle_phi.values) v -= shift;
    double err = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) err = std::max(err, std::abs(oracle_phi[i] - rep.phi[i]));
    CHECK(err < 1e-10);

    // mass identity
    const double mass = integrate(ma_density(add_ddc(theta, rep.phi)));
    VolumeDensity fw(g, std::vector<double>(g->node_count()));
    const auto ref = ma_density(theta);
    for (std::size_t i = 0; i < fw.values.size(); ++i) fw.values[i] = f[i] * ref.values[i];
    CHECK(std::abs(mass - rep.c * integrate(fw)) / mass < 1e-8);
}

TEST_CASE("solve_ma in dimension one: c scales exactly with the density mass") {
    const auto g = make_torus1(64, 8);
    const auto theta = reference_metric(g);
    const auto f = torus1_density(g, 0.4);
    ScalarField f_shifted(g);
    for (std::size_t i = 0; i < f.size(); ++i) f_shifted[i] = f[i] + 0.25;
    const auto r1 = solve_ma(theta, f, theta, 1e-10);
    const auto r2 = solve_ma(theta, f_shifted, theta, 1e-10);
    // masses: int f = 1, int f_shifted = 1.25
    CHECK(r1.c / r2.c == doctest::Approx(1.25).epsilon(1e-10));
}

TEST_CASE("solve_ma converges spectrally in dimension one") {
    // analytic non-band-limited density: compare c across grids against a
    // fine-grid reference
    auto run = [&](int n) {
        const auto g = make_torus1(n, 8);
        const auto theta = reference_metric(g);
        ScalarField f(g);
        const int ny = g->grid[1];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < ny; ++j)
                f.values[static_cast<std::size_t>(i) * ny + j] = std::exp(1.5 * std::cos(2.0 * PI * i / n));
        return solve_ma(theta, f, theta, 1e-11).c;
    };
    const double c_ref = run(128);
    const double e8 = std::abs(run(8) - c_ref);
    const double e16 = std::abs(run(16) - c_ref);
    CHECK(e8 > 1e-12);
    CHECK(e16 < e8 / 50.0); // far beyond any fixed algebraic order
}

TEST_CASE("solve_ma on the Hopf model against a four-times-finer self oracle") {
    const auto fine = make_hopf(512);
    const auto coarse = make_hopf(128);
    const auto rep_f = solve_ma(reference_metric(fine), hopf_density(fine, 0.5), reference_metric(fine), 1e-11);
    const auto rep_c = solve_ma(reference_metric(coarse), hopf_density(coarse, 0.5), reference_metric(coarse), 1e-11);
    CHECK(std::abs(rep_f.c - rep_c.c) < 1e-6);
    double err = 0.0;
    for (std::size_t i = 0; i < coarse->node_count(); ++i)
        err = std::max(err, std::abs(rep_c.phi[i] - rep_f.phi[4 * i]));
    CHECK(err < 1e-6);
}

TEST_CASE("solve_ma on BlowupCalabi converges at better than second order") {
    // manufactured Neumann-compatible solution with c = 1
    auto solve_err = [&](int n) {
        const auto g = make_blowup(n, 2.0, 1.0, 4.0);
        const auto theta = reference_metric(g);
        const double w = PI / (g->rho_max - g->rho_min);
        const double A = 0.05;
        ScalarField f(g), phi_star(g);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = g->rho(i) - g->rho_min;
            phi_star[i] = A * std::cos(w * x);
            const double dphi = -A * w * std::sin(w * x);
            const double ddphi = -A * w * w * std::cos(w * x);
            const double a = theta.comps[0][i] + dphi, b = theta.comps[1][i] + ddphi;
            f[i] = a * b / (theta.comps[0][i] * theta.comps[1][i]);
        }
        const auto rep = solve_ma(theta, f, theta, 1e-12);
        const double shift = phi_star.max();
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            err = std::max(err, std::abs(rep.phi[i] - (phi_star[i] - shift)));
        return err;
    };
    const double e1 = solve_err(64), e2 = solve_err(128);
    CHECK(e2 < e1 / 4.0);
}

TEST_CASE("solve_ma rejects bad inputs") {
    const auto g = make_hopf(32);
    const auto theta = reference_metric(g);
    CHECK_THROWS_AS(solve_ma(OneOneForm::radial_constant(g, -1.0, 1.0), ScalarField(g, 1.0), theta, 1e-10),
                    NonPositiveForm);
    CHECK_THROWS_AS(solve_ma(theta, ScalarField(g, 0.0), theta, 1e-10), NonPositiveForm);
    MaOptions opts;
    opts.max_iter = 1;
    CHECK_THROWS_AS(solve_ma(theta, hopf_density(g, 0.9), theta, 1e-13, opts), MaxIterations);
}

TEST_CASE("continuity path is consistent with direct solves for positive classes") {
    const auto g = make_hopf(128);
    const auto theta = reference_metric(g);
    const auto f = hopf_density(g, 0.3);
    const auto path = continuity_path(theta, f, theta, {0.5, 0.25, 0.1, 1e-9}, 1e-11);
    for (const auto& [t, rep] : path.ladder) {
        const auto direct = solve_ma(theta + t * theta, f, theta, 1e-11);
        CHECK(std::abs(rep.c - direct.c) < 1e-8);
        double err = 0.0;
        for (std::size_t i = 0; i < g->node_count(); ++i)
            err = std::max(err, std::abs(rep.phi[i] - direct.phi[i]));
        CHECK(err < 1e-8);
    }

    const auto t2 = make_torus2(8, 8, 8, 8);
    const auto theta2 = reference_metric(t2);
    const auto path2 = continuity_path(theta2, ScalarField(t2, 1.0), theta2, {0.25, 1e-9}, 1e-10);
    const auto direct2 = solve_ma(theta2, ScalarField(t2, 1.0), theta2, 1e-10);
    CHECK(std::abs(path2.ladder.back().second.c - direct2.c) < 1e-8);
}

TEST_CASE("continuity path on a class degenerating along the exceptional curve") {
    const auto g = make_blowup(128, 2.0, 1.0, 4.0);
    // theta with zero slope at the exceptional end (nef and big, degenerate on E)
    OneOneForm theta = OneOneForm::zero(g);
    const double upp = g->slope_line / (g->rho_max - g->rho_min);
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        theta.comps[0][i] = upp * (g->rho(i) - g->rho_min);
        theta.comps[1][i] = upp;
    }
    const auto omega_ref = reference_metric(g);
    const auto path = continuity_path(theta, ScalarField(g, 1.0), omega_ref, {0.4, 0.2, 0.1, 0.05}, 1e-10);
    // class volume of theta_t stays bounded below: c_t >= positive constant
    double cmin = 1e300;
    for (const auto& [t, rep] : path.ladder) {
        CHECK(rep.converged);
        cmin = std::min(cmin, rep.c);
    }
    CHECK(cmin > 0.1);
    CHECK_THROWS_AS(continuity_path(theta, ScalarField(g, 1.0), omega_ref, {0.1, 0.2}, 1e-10),
                    NonMonotoneLadder);
}

TEST_CASE("c bounds from the Gauduchon-twisted pairing") {
    const auto t1 = make_torus1(64, 8);
    const auto theta1 = reference_metric(t1);
    const auto rep1 = solve_ma(theta1, ScalarField(t1, 1.0), theta1, 1e-10);
    const auto b1 = c_bounds_check(rep1, theta1, ScalarField(t1, 1.0), theta1, ScalarField(t1, 0.0));
    CHECK(b1.pass);
    CHECK(rep1.c <= b1.upper * (1.0 + 1e-10));

    const auto g = make_hopf(64);
    const auto wH = reference_metric(g);
    const auto rep = solve_ma(wH, ScalarField(g, 1.0), wH, 1e-10);
    const auto G = gauduchon_factor(wH);
    const auto b = c_bounds_check(rep, wH, ScalarField(g, 1.0), wH, G);
    CHECK(b.pass);
    CHECK(rep.c <= b.upper * (1.0 + 1e-10));

    SolveReport adversarial = rep;
    adversarial.c *= 10.0;
    CHECK_FALSE(c_bounds_check(adversarial, wH, ScalarField(g, 1.0), wH, G).pass);
}
