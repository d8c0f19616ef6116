#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "magopt/vec2.hpp"

namespace magopt {

enum class ShapeKind { Disk, Ellipse, Polygon };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Disk;
    double a = 1.0;  // ellipse semi-axes
    double b = 1.0;
    std::vector<Vec2> vertices;  // polygon
};

// "disk" | "ellipse:a,b" | "polygon:x1,y1;x2,y2;..."
ShapeSpec parse_shape_spec(const std::string& text);

struct Panel {
    Vec2 a, b;       // endpoints, counterclockwise
    Vec2 mid;        // collocation point
    Vec2 normal;     // outward unit normal
    double length = 0.0;
    double curvature = 0.0;  // signed curvature of the underlying shape (0 for polygons)
};

// Closed counterclockwise polyline approximating the inclusion boundary,
// origin inside; area is the enclosed polygon area.
struct InclusionShape {
    std::vector<Panel> panels;
    double area = 0.0;

    int size() const { return static_cast<int>(panels.size()); }
};

InclusionShape panelize(const ShapeSpec& spec, int n_panels);
InclusionShape rotated(const InclusionShape& shape, double alpha);

// Piecewise-constant single-layer density per panel; sum q_i len_i = 0.
struct PanelDensity {
    std::vector<double> q;
};

// Second-kind integral equation
//   (nu0+nu1)/(nu0-nu1) q(x)/2 + int_{dD} q(y) (grad E(x-y).n(x)) ds(y) = g.n(x)
// with E(z) = -(1/2pi) ln|z|, collocated at panel midpoints; the zero-mean
// constraint is enforced with a Lagrange multiplier.
PanelDensity solve_density(const InclusionShape& shape, double nu0, double nu1, const Vec2& g);

struct PolarizationMatrix {
    Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
    double nu0 = 0.0;
    double nu1 = 0.0;
};

// Columns from solving with g = e1, e2 and assembling sum q_i x_i len_i.
// Checks the first-moment identity sum x n^T len = |D| I on the panelization.
PolarizationMatrix polarization_matrix(const InclusionShape& shape, double nu0, double nu1);

// Closed form for the unit disk: 2 pi (nu0-nu1)/(nu0+nu1) I.
Eigen::Matrix2d disk_polarization_matrix(double nu0, double nu1);

// First-moment sum over the panels, exact divergence-theorem identity.
Eigen::Matrix2d moment_matrix(const InclusionShape& shape);

}  // namespace magopt
