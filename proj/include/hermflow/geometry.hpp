#pragma once

// Model geometries and discrete fields.
//
// Four symmetry-reduced models are supported:
//   Torus1        complex dimension 1, flat torus, periodic grid in (x, y).
//   Torus2        complex dimension 2, flat torus, periodic grid in (x1, y1, x2, y2).
//   Hopf          complex dimension 2, U(2)-invariant data on the quotient of
//                 C^2 \ {0} by z -> gamma*z; fields are periodic in rho = log|z|^2
//                 with period 2*log(gamma).
//   BlowupCalabi  complex dimension 2, U(2)-invariant Calabi-ansatz profile on a
//                 finite rho-interval [-R, R]; the rho -> -R end models the
//                 exceptional curve, potentials satisfy phi'(+-R) = 0 and the
//                 background profile carries prescribed asymptotic slopes.
//
// Radial (1,1)-forms are coefficient pairs (a, b) in the frame
// (ddc rho, drho ^ dc rho); torus forms are Hermitian coefficient matrices in
// the i dz^j ^ dzbar^k basis.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "hermflow/errors.hpp"

namespace hermflow {

enum class GeometryKind { Torus1, Torus2, Hopf, BlowupCalabi };

enum class SubvarietyKind { ExceptionalCurve, FiberClass, Whole };

struct SubvarietyTag {
    std::string name;
    SubvarietyKind kind = SubvarietyKind::Whole;
};

std::string to_string(GeometryKind kind);
std::string to_string(SubvarietyKind kind);

class ModelGeometry {
public:
    GeometryKind kind = GeometryKind::Torus1;

    // Grid sizes per real coordinate: 2 entries for Torus1, 4 for Torus2,
    // 1 for the radial models.
    std::vector<int> grid;

    // Tori: period per real coordinate (always 1).
    // Hopf: rho-period L = 2*log(contraction_factor).
    double period = 1.0;
    double contraction_factor = 2.0; // Hopf only

    // BlowupCalabi only.
    double rho_min = 0.0;
    double rho_max = 0.0;
    double slope_e = 0.0;    // asymptotic u' at the exceptional end
    double slope_line = 0.0; // asymptotic u' at the outer end

    std::vector<SubvarietyTag> tracked;

    int complex_dim() const;
    std::size_t node_count() const;
    bool is_radial() const { return kind == GeometryKind::Hopf || kind == GeometryKind::BlowupCalabi; }

    // Radial grid spacing (Hopf: L/n; Blowup: 2R/(n-1)).
    double radial_spacing() const;
    // Radial node coordinate.
    double rho(std::size_t i) const;

    bool same_as(const ModelGeometry& other) const;

    void validate() const;
};

using GeometryPtr = std::shared_ptr<const ModelGeometry>;

GeometryPtr make_torus1(int nx, int ny);
GeometryPtr make_torus2(int n0, int n1, int n2, int n3);
GeometryPtr make_hopf(int n, double contraction_factor = 2.0);
GeometryPtr make_blowup(int n, double radius, double slope_e, double slope_line);

struct ScalarField {
    GeometryPtr geo;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(GeometryPtr g, double fill = 0.0);
    ScalarField(GeometryPtr g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double max() const;
    double min() const;
    double sup_abs() const;
    bool finite() const;
};

ScalarField operator+(const ScalarField& u, const ScalarField& v);
ScalarField operator-(const ScalarField& u, const ScalarField& v);
ScalarField operator*(double s, const ScalarField& u);

// Real (1,1)-form.
//
// Component layout:
//   Torus1:       comps = {a}                 alpha = i a dz ^ dzbar
//   Torus2:       comps = {a11, a22, re12, im12}
//   Hopf/Blowup:  comps = {a, b}              alpha = a ddc(rho) + b drho^dc(rho)
class OneOneForm {
public:
    GeometryPtr geo;
    std::vector<std::vector<double>> comps;

    OneOneForm() = default;

    static OneOneForm zero(GeometryPtr g);
    static OneOneForm radial(const ScalarField& a, const ScalarField& b);
    static OneOneForm radial_constant(GeometryPtr g, double a, double b);
    static OneOneForm torus1(const ScalarField& a);
    static OneOneForm torus2(const ScalarField& a11, const ScalarField& a22,
                             const ScalarField& re12, const ScalarField& im12);
    static OneOneForm torus2_diag(GeometryPtr g, double d1, double d2);

    std::size_t nodes() const { return geo ? geo->node_count() : 0; }

    // Radial accessors.
    const std::vector<double>& radial_a() const { return comps[0]; }
    const std::vector<double>& radial_b() const { return comps[1]; }
    std::vector<double>& radial_a() { return comps[0]; }
    std::vector<double>& radial_b() { return comps[1]; }

    bool finite() const;
};

OneOneForm operator+(const OneOneForm& x, const OneOneForm& y);
OneOneForm operator-(const OneOneForm& x, const OneOneForm& y);
OneOneForm operator*(double s, const OneOneForm& x);

// Top-degree density relative to the geometry's reference volume element.
struct VolumeDensity {
    GeometryPtr geo;
    std::vector<double> values;

    VolumeDensity() = default;
    VolumeDensity(GeometryPtr g, std::vector<double> v) : geo(std::move(g)), values(std::move(v)) {}
};

// Reference metric: dx^dy on Torus1, the identity matrix on Torus2, (1,1) on
// Hopf, and the linear-slope Calabi background on BlowupCalabi.
OneOneForm reference_metric(const GeometryPtr& g);

void require_same_geometry(const GeometryPtr& a, const GeometryPtr& b, const char* where);

} // namespace hermflow
