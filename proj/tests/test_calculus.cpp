#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hermflow/calculus.hpp"
#include "hermflow/errors.hpp"
#include "oracles.hpp"

using namespace hermflow;
namespace {
constexpr double PI = std::numbers::pi;

ScalarField torus1_wave(const GeometryPtr& g, double amp, int k) {
    ScalarField u(g);
    const int nx = g->grid[0], ny = g->grid[1];
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            u.values[static_cast<std::size_t>(i) * ny + j] = amp * std::cos(2.0 * PI * k * i / nx);
    return u;
}

ScalarField hopf_wave(const GeometryPtr& g, double amp, int k, double phase = 0.0) {
    ScalarField u(g);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = amp * std::sin(2.0 * PI * k * g->rho(i) / g->period + phase);
    return u;
}

} // namespace

TEST_CASE("ddc of the zero field is the zero form") {
    for (const auto& g : {make_torus1(16, 8), make_hopf(32)}) {
        const auto f = ddc(ScalarField(g, 0.0));
        for (const auto& c : f.comps)
            for (double v : c) CHECK(v == 0.0);
    }
}

TEST_CASE("ddc of cos(2 pi x) on Torus1 has density -2 pi^2 cos(2 pi x)") {
    const auto g = make_torus1(64, 8);
    const auto dd = ddc(torus1_wave(g, 1.0, 1));
    const auto dens = wedge_top(dd);
    const int ny = g->grid[1];
    for (int i = 0; i < 64; ++i) {
        const double want = -2.0 * PI * PI * std::cos(2.0 * PI * i / 64.0);
        CHECK(std::abs(dens.values[static_cast<std::size_t>(i) * ny] - want) < 1e-9);
    }
}

TEST_CASE("spectral and finite-difference ddc agree at second order") {
    double err[2];
    int idx = 0;
    for (int n : {32, 64}) {
        const auto g = make_torus1(n, 8);
        const auto u = torus1_wave(g, 1.0, 1);
        const auto a = ddc(u), b = ddc_fd(u);
        double e = 0.0;
        for (std::size_t i = 0; i < g->node_count(); ++i)
            e = std::max(e, std::abs(a.comps[0][i] - b.comps[0][i]));
        err[idx++] = e;
    }
    CHECK(err[0] / err[1] > 3.0); // ~ h^2
    CHECK(err[0] / err[1] < 5.0);
}

TEST_CASE("ddc on the Hopf model reproduces the radial pair formula") {
    const auto g = make_hopf(128);
    const double L = g->period;
    const auto dd = ddc(hopf_wave(g, 1.0, 1));
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        const double rho = g->rho(i);
        CHECK(std::abs(dd.comps[0][i] - (2 * PI / L) * std::cos(2 * PI * rho / L)) < 1e-10);
        CHECK(std::abs(dd.comps[1][i] + std::pow(2 * PI / L, 2) * std::sin(2 * PI * rho / L)) < 1e-9);
    }
}

TEST_CASE("ddc is linear") {
    const auto g = make_hopf(64);
    const auto u = hopf_wave(g, 0.7, 1), v = hopf_wave(g, 0.3, 2, 0.4);
    const auto lhs = ddc(u + v);
    const auto rhs = ddc(u) + ddc(v);
    const double scale = std::max(form_scale(lhs), 1.0);
    for (std::size_t c = 0; c < lhs.comps.size(); ++c)
        for (std::size_t i = 0; i < g->node_count(); ++i)
            CHECK(std::abs(lhs.comps[c][i] - rhs.comps[c][i]) < 1e-12 * scale);
}

TEST_CASE("ddc rejects NaN input and mismatched geometries") {
    const auto g = make_hopf(32);
    ScalarField u(g, 0.0);
    u[3] = std::nan("");
    CHECK_THROWS_AS(ddc(u), NanInput);
    CHECK_THROWS_AS(ScalarField(make_hopf(64)) + ScalarField(g), GeometryMismatch);
}

TEST_CASE("frame identity: omega_H wedge omega_H has density exactly 2") {
    const auto g = make_hopf(64);
    const auto wH = reference_metric(g);
    const auto d = wedge_top(wH, wH);
    for (double v : d.values) CHECK(v == 2.0);
}

TEST_CASE("torus2 identity wedge and normalization") {
    const auto g = make_torus2(8, 8, 8, 8);
    const auto I = reference_metric(g);
    const auto d = wedge_top(I, I);
    for (double v : d.values) CHECK(v == 2.0);
    CHECK(integrate(d) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hopf wedge (1,1)^(1-2t,1) has density 2-2t") {
    const auto g = make_hopf(32);
    const auto wH = reference_metric(g);
    for (double t : {0.1, 0.25, 0.45}) {
        const auto a = OneOneForm::radial_constant(g, 1.0 - 2.0 * t, 1.0);
        const auto d = wedge_top(wH, a);
        for (double v : d.values) CHECK(v == doctest::Approx(2.0 - 2.0 * t).epsilon(1e-15));
    }
}

TEST_CASE("wedge_top rejects wrong arity") {
    const auto g = make_hopf(32);
    const auto wH = reference_metric(g);
    CHECK_THROWS_AS(wedge_top(std::vector<const OneOneForm*>{&wH}), WrongArity);
}

TEST_CASE("integrate: zero density, torus normalization, and the transverse constant") {
    const auto g = make_hopf(64);
    CHECK(integrate(VolumeDensity(g, std::vector<double>(64, 0.0))) == 0.0);

    const auto t1 = make_torus1(16, 8);
    CHECK(integrate(wedge_top(reference_metric(t1))) == doctest::Approx(1.0).epsilon(1e-14));

    // against the Monte Carlo oracle for the transverse fiber volume
    const double c0_mc = oracle::mc_transverse_volume(2000000, 12345);
    CHECK(std::abs(c0_mc - kRadialTransverseVolume) / kRadialTransverseVolume < 0.01);

    const double total = integrate(wedge_top(reference_metric(g), reference_metric(g)));
    CHECK(total == doctest::Approx(2.0 * kRadialTransverseVolume * g->period).epsilon(1e-13));
}

TEST_CASE("positivity margin: trivial cases and homogeneity") {
    const auto g = make_hopf(32);
    const auto wH = reference_metric(g);
    CHECK(positivity_margin(wH, wH) == doctest::Approx(1.0));
    const auto a = OneOneForm::radial_constant(g, 0.5, 1.0); // (1-2t,1) at t=0.25
    CHECK(positivity_margin(a, wH) == doctest::Approx(0.5));

    const auto t2 = make_torus2(8, 8, 8, 8);
    const auto d23 = OneOneForm::torus2_diag(t2, 2.0, 3.0);
    CHECK(positivity_margin(d23, reference_metric(t2)) == doctest::Approx(2.0));

    for (double s : {0.3, 2.0, 7.5})
        CHECK(positivity_margin(s * d23, reference_metric(t2)) ==
              doctest::Approx(s * positivity_margin(d23, reference_metric(t2))).epsilon(1e-12));

    const auto bad = OneOneForm::radial_constant(g, -1.0, 1.0);
    CHECK_THROWS_AS(positivity_margin(wH, bad), NonPositiveForm);
}

TEST_CASE("ricci form: flat torus, omega_H, and constant-volume radial metrics") {
    const auto t2 = make_torus2(8, 8, 8, 8);
    const auto ric_flat = ricci_form(reference_metric(t2));
    for (const auto& c : ric_flat.comps)
        for (double v : c) CHECK(std::abs(v) < 1e-12);

    const auto g = make_hopf(64);
    const auto ric = ricci_form(reference_metric(g));
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        CHECK(ric.comps[0][i] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(ric.comps[1][i]) < 1e-10);
    }

    // a(rho) b(rho) = const: same Ricci form
    ScalarField ea(g), eb(g);
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        const double h = 0.4 * std::sin(2 * PI * g->rho(i) / g->period);
        ea[i] = std::exp(h);
        eb[i] = std::exp(-h);
    }
    const auto ric2 = ricci_form(OneOneForm::radial(ea, eb));
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        CHECK(ric2.comps[0][i] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(std::abs(ric2.comps[1][i]) < 1e-8);
    }

    // finite-difference cross-check of -ddc log det on the Hopf model:
    // det g ~ a b e^{-2 rho}, so Ric_a = 2 - (log ab)' computed locally
    const auto nonconst = OneOneForm::radial(ea, ScalarField(g, std::vector<double>(g->node_count(), 1.0)));
    const auto ric3 = ricci_form(nonconst);
    std::vector<double> s(g->node_count());
    for (std::size_t i = 0; i < g->node_count(); ++i) s[i] = std::log(ea[i]);
    const auto s1 = radial_d1_fd(g, s), s2 = radial_d2_fd(g, s);
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        CHECK(std::abs(ric3.comps[0][i] - (2.0 - s1[i])) < 1e-2);
        CHECK(std::abs(ric3.comps[1][i] - (-s2[i])) < 5e-2);
    }

    CHECK_THROWS_AS(ricci_form(OneOneForm::radial_constant(g, 0.0, 1.0)), NonPositiveForm);
}

TEST_CASE("trace: alpha = omega gives n, plus the pinned examples") {
    const auto g = make_hopf(32);
    const auto wH = reference_metric(g);
    const auto tr1 = trace_form(wH, wH);
    for (std::size_t i = 0; i < tr1.size(); ++i) CHECK(tr1[i] == doctest::Approx(2.0));

    const auto tr2 = trace_form(OneOneForm::radial_constant(g, 2.0, 0.0), wH);
    for (std::size_t i = 0; i < tr2.size(); ++i) CHECK(tr2[i] == doctest::Approx(2.0));

    const auto t2 = make_torus2(8, 8, 8, 8);
    const auto tr3 = trace_form(OneOneForm::torus2_diag(t2, 1.0, 4.0), OneOneForm::torus2_diag(t2, 1.0, 2.0));
    for (std::size_t i = 0; i < tr3.size(); ++i) CHECK(tr3[i] == doctest::Approx(3.0));
}

TEST_CASE("restricted volumes") {
    const auto bu = make_blowup(64, 2.0, 1.0, 4.0);
    const auto omega = reference_metric(bu);
    const SubvarietyTag e{"E", SubvarietyKind::ExceptionalCurve};
    const double area_mc = oracle::mc_exceptional_area(2000000, 99);
    CHECK(std::abs(area_mc - kExceptionalCurveArea) / kExceptionalCurveArea < 0.01);
    CHECK(restricted_volume(omega, e) == doctest::Approx(1.0 * kExceptionalCurveArea).epsilon(1e-13));

    const auto g = make_hopf(64);
    const SubvarietyTag whole{"whole", SubvarietyKind::Whole};
    CHECK(restricted_volume(reference_metric(g), whole) ==
          doctest::Approx(2.0 * kRadialTransverseVolume * g->period).epsilon(1e-13));
    CHECK(restricted_volume(OneOneForm::zero(g), whole) == 0.0);

    CHECK_THROWS_AS(restricted_volume(reference_metric(g), e), UntrackedSubvariety);
}

TEST_CASE("max_glue: trivial cases and psh stability of the local operator") {
    const auto g = make_torus1(128, 8);
    const auto phi = torus1_wave(g, 0.01, 1);
    const auto same = max_glue(phi, phi);
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(same[i] == phi[i]);
    ScalarField lower = phi;
    for (auto& v : lower.values) v -= 1.0;
    const auto top = max_glue(phi, lower);
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(top[i] == phi[i]);

    // random pairs of theta-psh functions stay theta-psh after gluing, up to
    // the discretization tolerance of the local operator
    const auto theta = reference_metric(g);
    const double h = 1.0 / g->grid[0];
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        ScalarField u(g), v(g);
        const int nx = g->grid[0], ny = g->grid[1];
        for (int k = 1; k <= 3; ++k) {
            const double au = 0.004 * U(rng), av = 0.004 * U(rng);
            const double pu = PI * U(rng), pv = PI * U(rng);
            const int kyv = k % 2;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    const std::size_t m = static_cast<std::size_t>(i) * ny + j;
                    u[m] += au * std::cos(2 * PI * k * i / nx + pu);
                    v[m] += av * std::cos(2 * PI * (k * i / static_cast<double>(nx) +
                                                    kyv * j / static_cast<double>(ny)) +
                                           pv);
                }
        }
        // rescale each sample into the theta-psh cone (margin is affine in the
        // scale in complex dimension one)
        auto rescale = [&](ScalarField& w) {
            const double m = positivity_margin(theta + ddc_fd(w), theta);
            if (m < 0.05) w = (0.95 / (1.0 - m)) * w;
        };
        rescale(u);
        rescale(v);
        REQUIRE(positivity_margin(theta + ddc_fd(u), theta) > 0.0);
        REQUIRE(positivity_margin(theta + ddc_fd(v), theta) > 0.0);
        const auto glued = max_glue(u, v);
        CHECK(positivity_margin(theta + ddc_fd(glued), theta) >= -5.0 * h);
    }
}

TEST_CASE("integration by parts on closed reference data") {
    const auto t1 = make_torus1(64, 8);
    const auto u = torus1_wave(t1, 0.3, 2);
    CHECK(std::abs(integrate(wedge_top(ddc(u)))) < 1e-10);

    const auto t2 = make_torus2(8, 8, 8, 8);
    ScalarField w(t2);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * std::sin(2 * PI * (i % 8) / 8.0);
    CHECK(std::abs(integrate(wedge_top(ddc(w), reference_metric(t2)))) < 1e-10);

    const auto g = make_hopf(64);
    const auto v = hopf_wave(g, 0.5, 2, 0.3);
    // omega_H and Guan-Li-type radial forms (b - a' constant) pair to zero
    CHECK(std::abs(integrate(wedge_top(ddc(v), reference_metric(g)))) < 1e-10);
    ScalarField a(g), b(g);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = 2.0 + 0.3 * std::sin(2 * PI * g->rho(i) / g->period);
        b[i] = 0.3 * (2 * PI / g->period) * std::cos(2 * PI * g->rho(i) / g->period) + 0.7;
    }
    CHECK(std::abs(integrate(wedge_top(ddc(v), OneOneForm::radial(a, b)))) < 1e-10);
}

TEST_CASE("ddc-closedness density: exact forms are closed, frame formula validated") {
    const auto g = make_hopf(64);
    const auto exact = ddc(hopf_wave(g, 0.8, 3));
    const auto resid = ddc_form_density(exact);
    for (double v : resid) CHECK(std::abs(v) < 1e-9);

    // pointwise Monte Carlo validation of ddc(omega) = (a'' - b') V from raw
    // coordinate second differences
    const double worst = oracle::mc_radial_ddc_form_residual({0.0, 0.0, 1.0}, {1.0, 1.0}, 200, 4242);
    CHECK(worst < 1e-4);
}
