#include "hermflow/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hermflow {

std::string to_string(GeometryKind kind) {
    switch (kind) {
        case GeometryKind::Torus1: return "torus1";
        case GeometryKind::Torus2: return "torus2";
        case GeometryKind::Hopf: return "hopf";
        case GeometryKind::BlowupCalabi: return "blowup-calabi";
    }
    return "?";
}

std::string to_string(SubvarietyKind kind) {
    switch (kind) {
        case SubvarietyKind::ExceptionalCurve: return "exceptional-curve";
        case SubvarietyKind::FiberClass: return "fiber-class";
        case SubvarietyKind::Whole: return "whole";
    }
    return "?";
}

int ModelGeometry::complex_dim() const {
    return kind == GeometryKind::Torus1 ? 1 : 2;
}

std::size_t ModelGeometry::node_count() const {
    std::size_t n = 1;
    for (int g : grid) n *= static_cast<std::size_t>(g);
    return n;
}

double ModelGeometry::radial_spacing() const {
    if (kind == GeometryKind::Hopf) return period / grid[0];
    if (kind == GeometryKind::BlowupCalabi) return (rho_max - rho_min) / (grid[0] - 1);
    throw UnsupportedGeometry("radial_spacing on a torus");
}

double ModelGeometry::rho(std::size_t i) const {
    if (kind == GeometryKind::Hopf) return static_cast<double>(i) * radial_spacing();
    if (kind == GeometryKind::BlowupCalabi) return rho_min + static_cast<double>(i) * radial_spacing();
    throw UnsupportedGeometry("rho on a torus");
}

bool ModelGeometry::same_as(const ModelGeometry& other) const {
    return kind == other.kind && grid == other.grid && period == other.period &&
           rho_min == other.rho_min && rho_max == other.rho_max &&
           slope_e == other.slope_e && slope_line == other.slope_line;
}

void ModelGeometry::validate() const {
    for (int g : grid) {
        if (g < 8) throw ConfigError("grid size must be >= 8 in each coordinate, got " + std::to_string(g));
    }
    switch (kind) {
        case GeometryKind::Torus1:
            if (grid.size() != 2) throw ConfigError("torus1 needs 2 grid sizes");
            break;
        case GeometryKind::Torus2:
            if (grid.size() != 4) throw ConfigError("torus2 needs 4 grid sizes");
            break;
        case GeometryKind::Hopf: {
            if (grid.size() != 1) throw ConfigError("hopf needs 1 grid size");
            if (contraction_factor <= 1.0) throw ConfigError("hopf contraction factor must exceed 1");
            const double expect = 2.0 * std::log(contraction_factor);
            if (std::abs(period - expect) > 1e-12)
                throw ConfigError("hopf period must equal 2*log(contraction factor)");
            break;
        }
        case GeometryKind::BlowupCalabi:
            if (grid.size() != 1) throw ConfigError("blowup-calabi needs 1 grid size");
            if (!(rho_max > rho_min)) throw ConfigError("blowup-calabi interval is empty");
            if (!(slope_e > 0.0 && slope_e < slope_line))
                throw ConfigError("blowup-calabi needs 0 < a_E < b_line");
            break;
    }
    for (const auto& tag : tracked) {
        const bool ok =
            tag.kind == SubvarietyKind::Whole ||
            (tag.kind == SubvarietyKind::ExceptionalCurve && kind == GeometryKind::BlowupCalabi) ||
            (tag.kind == SubvarietyKind::FiberClass && kind == GeometryKind::Hopf);
        if (!ok) throw ConfigError("tracked subvariety '" + tag.name + "' does not match geometry kind");
    }
}

static GeometryPtr finish(ModelGeometry g) {
    g.validate();
    return std::make_shared<const ModelGeometry>(std::move(g));
}

GeometryPtr make_torus1(int nx, int ny) {
    ModelGeometry g;
    g.kind = GeometryKind::Torus1;
    g.grid = {nx, ny};
    g.period = 1.0;
    g.tracked = {{"whole", SubvarietyKind::Whole}};
    return finish(std::move(g));
}

GeometryPtr make_torus2(int n0, int n1, int n2, int n3) {
    ModelGeometry g;
    g.kind = GeometryKind::Torus2;
    g.grid = {n0, n1, n2, n3};
    g.period = 1.0;
    g.tracked = {{"whole", SubvarietyKind::Whole}};
    return finish(std::move(g));
}

GeometryPtr make_hopf(int n, double contraction_factor) {
    ModelGeometry g;
    g.kind = GeometryKind::Hopf;
    g.grid = {n};
    g.contraction_factor = contraction_factor;
    g.period = 2.0 * std::log(contraction_factor);
    g.tracked = {{"whole", SubvarietyKind::Whole}, {"fiber", SubvarietyKind::FiberClass}};
    return finish(std::move(g));
}

GeometryPtr make_blowup(int n, double radius, double slope_e, double slope_line) {
    ModelGeometry g;
    g.kind = GeometryKind::BlowupCalabi;
    g.grid = {n};
    g.rho_min = -radius;
    g.rho_max = radius;
    g.slope_e = slope_e;
    g.slope_line = slope_line;
    g.tracked = {{"whole", SubvarietyKind::Whole}, {"E", SubvarietyKind::ExceptionalCurve}};
    return finish(std::move(g));
}

ScalarField::ScalarField(GeometryPtr g, double fill)
    : geo(std::move(g)), values(geo->node_count(), fill) {}

ScalarField::ScalarField(GeometryPtr g, std::vector<double> v)
    : geo(std::move(g)), values(std::move(v)) {
    if (values.size() != geo->node_count())
        throw GeometryMismatch("scalar field length does not match grid");
}

double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }

double ScalarField::sup_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

ScalarField operator+(const ScalarField& u, const ScalarField& v) {
    require_same_geometry(u.geo, v.geo, "scalar +");
    ScalarField w(u.geo);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] + v[i];
    return w;
}

ScalarField operator-(const ScalarField& u, const ScalarField& v) {
    require_same_geometry(u.geo, v.geo, "scalar -");
    ScalarField w(u.geo);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] - v[i];
    return w;
}

ScalarField operator*(double s, const ScalarField& u) {
    ScalarField w(u.geo);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * u[i];
    return w;
}

static std::size_t component_count(const ModelGeometry& g) {
    switch (g.kind) {
        case GeometryKind::Torus1: return 1;
        case GeometryKind::Torus2: return 4;
        default: return 2;
    }
}

OneOneForm OneOneForm::zero(GeometryPtr g) {
    OneOneForm f;
    f.geo = std::move(g);
    f.comps.assign(component_count(*f.geo), std::vector<double>(f.geo->node_count(), 0.0));
    return f;
}

OneOneForm OneOneForm::radial(const ScalarField& a, const ScalarField& b) {
    require_same_geometry(a.geo, b.geo, "radial form");
    if (!a.geo->is_radial()) throw GeometryMismatch("radial form on a torus");
    OneOneForm f;
    f.geo = a.geo;
    f.comps = {a.values, b.values};
    return f;
}

OneOneForm OneOneForm::radial_constant(GeometryPtr g, double a, double b) {
    if (!g->is_radial()) throw GeometryMismatch("radial form on a torus");
    OneOneForm f;
    f.geo = std::move(g);
    f.comps = {std::vector<double>(f.geo->node_count(), a),
               std::vector<double>(f.geo->node_count(), b)};
    return f;
}

OneOneForm OneOneForm::torus1(const ScalarField& a) {
    if (a.geo->kind != GeometryKind::Torus1) throw GeometryMismatch("torus1 form");
    OneOneForm f;
    f.geo = a.geo;
    f.comps = {a.values};
    return f;
}

OneOneForm OneOneForm::torus2(const ScalarField& a11, const ScalarField& a22,
                              const ScalarField& re12, const ScalarField& im12) {
    require_same_geometry(a11.geo, a22.geo, "torus2 form");
    require_same_geometry(a11.geo, re12.geo, "torus2 form");
    require_same_geometry(a11.geo, im12.geo, "torus2 form");
    if (a11.geo->kind != GeometryKind::Torus2) throw GeometryMismatch("torus2 form");
    OneOneForm f;
    f.geo = a11.geo;
    f.comps = {a11.values, a22.values, re12.values, im12.values};
    return f;
}

OneOneForm OneOneForm::torus2_diag(GeometryPtr g, double d1, double d2) {
    if (g->kind != GeometryKind::Torus2) throw GeometryMismatch("torus2 form");
    OneOneForm f;
    f.geo = std::move(g);
    const std::size_t n = f.geo->node_count();
    f.comps = {std::vector<double>(n, d1), std::vector<double>(n, d2),
               std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    return f;
}

bool OneOneForm::finite() const {
    for (const auto& c : comps)
        for (double v : c)
            if (!std::isfinite(v)) return false;
    return true;
}

static OneOneForm combine(const OneOneForm& x, const OneOneForm& y, double sy) {
    require_same_geometry(x.geo, y.geo, "form combine");
    OneOneForm f = x;
    for (std::size_t c = 0; c < f.comps.size(); ++c)
        for (std::size_t i = 0; i < f.comps[c].size(); ++i)
            f.comps[c][i] += sy * y.comps[c][i];
    return f;
}

OneOneForm operator+(const OneOneForm& x, const OneOneForm& y) { return combine(x, y, 1.0); }
OneOneForm operator-(const OneOneForm& x, const OneOneForm& y) { return combine(x, y, -1.0); }

OneOneForm operator*(double s, const OneOneForm& x) {
    OneOneForm f = x;
    for (auto& c : f.comps)
        for (double& v : c) v *= s;
    return f;
}

OneOneForm reference_metric(const GeometryPtr& g) {
    switch (g->kind) {
        case GeometryKind::Torus1: {
            // dx ^ dy = (i/2) dz ^ dzbar
            OneOneForm f = OneOneForm::zero(g);
            std::fill(f.comps[0].begin(), f.comps[0].end(), 0.5);
            return f;
        }
        case GeometryKind::Torus2:
            return OneOneForm::torus2_diag(g, 1.0, 1.0);
        case GeometryKind::Hopf:
            return OneOneForm::radial_constant(g, 1.0, 1.0);
        case GeometryKind::BlowupCalabi: {
            // Linear-slope Calabi profile: u'(rho) interpolates the prescribed
            // end slopes, u'' is the constant slope gap over the interval.
            OneOneForm f = OneOneForm::zero(g);
            const double upp = (g->slope_line - g->slope_e) / (g->rho_max - g->rho_min);
            for (std::size_t i = 0; i < g->node_count(); ++i) {
                f.comps[0][i] = g->slope_e + upp * (g->rho(i) - g->rho_min);
                f.comps[1][i] = upp;
            }
            return f;
        }
    }
    throw UnsupportedGeometry("reference_metric");
}

void require_same_geometry(const GeometryPtr& a, const GeometryPtr& b, const char* where) {
    if (!a || !b || !(a == b || a->same_as(*b)))
        throw GeometryMismatch(where);
}

} // namespace hermflow
