#include "magopt/polarization.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <sstream>

#include "magopt/errors.hpp"

namespace magopt {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> split_numbers(const std::string& text, char sep) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, sep)) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size()) throw ValidationError("bad number '" + item + "' in shape spec");
        out.push_back(v);
    }
    return out;
}

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double polygon_signed_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        a += cross(v[i], v[(i + 1) % v.size()]);
    }
    return 0.5 * a;
}

bool polygon_contains_origin(const std::vector<Vec2>& v) {
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > 0.0) != (v[j].y > 0.0)) {
            const double x_int = v[j].x + (0.0 - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (x_int > 0.0) inside = !inside;
        }
    }
    return inside;
}

Panel make_panel(const Vec2& a, const Vec2& b, double curvature) {
    Panel p;
    p.a = a;
    p.b = b;
    p.mid = (a + b) / 2.0;
    const Vec2 d = b - a;
    p.length = d.norm();
    // outward normal of a counterclockwise boundary: edge direction rotated -90deg
    p.normal = Vec2{d.y, -d.x} / p.length;
    p.curvature = curvature;
    return p;
}

void finalize_shape(InclusionShape& shape) {
    double area = 0.0;
    for (const auto& p : shape.panels) {
        area += 0.5 * p.length * p.mid.dot(p.normal);
    }
    shape.area = area;
    if (!(area > 0.0)) throw ValidationError("panelize: enclosed area must be positive");
}

}  // namespace

ShapeSpec parse_shape_spec(const std::string& text) {
    ShapeSpec spec;
    if (text == "disk") {
        spec.kind = ShapeKind::Disk;
        return spec;
    }
    if (text.rfind("ellipse:", 0) == 0) {
        const auto vals = split_numbers(text.substr(8), ',');
        if (vals.size() != 2) throw ValidationError("shape spec: ellipse needs 'ellipse:a,b'");
        spec.kind = ShapeKind::Ellipse;
        spec.a = vals[0];
        spec.b = vals[1];
        if (!(spec.a > 0.0) || !(spec.b > 0.0)) {
            throw ValidationError("shape spec: ellipse semi-axes must be positive");
        }
        return spec;
    }
    if (text.rfind("polygon:", 0) == 0) {
        spec.kind = ShapeKind::Polygon;
        std::string rest = text.substr(8);
        std::string pair;
        std::istringstream ss(rest);
        while (std::getline(ss, pair, ';')) {
            const auto vals = split_numbers(pair, ',');
            if (vals.size() != 2) {
                throw ValidationError("shape spec: polygon vertices are 'x,y' pairs");
            }
            spec.vertices.emplace_back(vals[0], vals[1]);
        }
        if (spec.vertices.size() < 3) {
            throw ValidationError("shape spec: polygon needs at least 3 vertices");
        }
        return spec;
    }
    throw ValidationError("unknown shape spec '" + text +
                          "' (expected disk | ellipse:a,b | polygon:x1,y1;x2,y2;...)");
}

InclusionShape panelize(const ShapeSpec& spec, int n_panels) {
    if (n_panels < 16) throw ValidationError("panelize: need at least 16 panels");

    InclusionShape shape;
    if (spec.kind == ShapeKind::Disk || spec.kind == ShapeKind::Ellipse) {
        const double a = (spec.kind == ShapeKind::Disk) ? 1.0 : spec.a;
        const double b = (spec.kind == ShapeKind::Disk) ? 1.0 : spec.b;
        shape.panels.reserve(static_cast<std::size_t>(n_panels));
        for (int i = 0; i < n_panels; ++i) {
            const double t0 = 2.0 * kPi * i / n_panels;
            const double t1 = 2.0 * kPi * (i + 1) / n_panels;
            const double tm = 0.5 * (t0 + t1);
            const double denom = std::pow(a * a * std::sin(tm) * std::sin(tm) +
                                              b * b * std::cos(tm) * std::cos(tm),
                                          1.5);
            const double curvature = a * b / denom;
            shape.panels.push_back(make_panel({a * std::cos(t0), b * std::sin(t0)},
                                              {a * std::cos(t1), b * std::sin(t1)}, curvature));
        }
        finalize_shape(shape);
        return shape;
    }

    // Polygon: check simplicity, reorient clockwise input, spread panels over
    // the edges proportionally to length.
    std::vector<Vec2> verts = spec.vertices;
    const std::size_t nv = verts.size();
    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = i + 1; j < nv; ++j) {
            if (segments_properly_intersect(verts[i], verts[(i + 1) % nv], verts[j],
                                            verts[(j + 1) % nv])) {
                throw ValidationError("panelize: polygon is self-intersecting");
            }
        }
    }
    const double signed_area = polygon_signed_area(verts);
    if (signed_area == 0.0) throw ValidationError("panelize: polygon has zero area");
    if (signed_area < 0.0) {
        std::cerr << "panelize: warning: clockwise polygon reoriented counterclockwise\n";
        std::reverse(verts.begin(), verts.end());
    }
    if (!polygon_contains_origin(verts)) {
        throw ValidationError("panelize: polygon must contain the origin");
    }

    double perimeter = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
        perimeter += (verts[(i + 1) % nv] - verts[i]).norm();
    }
    for (std::size_t i = 0; i < nv; ++i) {
        const Vec2& a = verts[i];
        const Vec2& b = verts[(i + 1) % nv];
        const double len = (b - a).norm();
        const int per_edge =
            std::max(1, static_cast<int>(std::round(n_panels * len / perimeter)));
        for (int k = 0; k < per_edge; ++k) {
            const Vec2 p0 = a + (b - a) * (static_cast<double>(k) / per_edge);
            const Vec2 p1 = a + (b - a) * (static_cast<double>(k + 1) / per_edge);
            shape.panels.push_back(make_panel(p0, p1, 0.0));
        }
    }
    finalize_shape(shape);
    return shape;
}

InclusionShape rotated(const InclusionShape& shape, double alpha) {
    InclusionShape out;
    out.area = shape.area;
    out.panels.reserve(shape.panels.size());
    for (const auto& p : shape.panels) {
        Panel q = p;
        q.a = p.a.rotated(alpha);
        q.b = p.b.rotated(alpha);
        q.mid = p.mid.rotated(alpha);
        q.normal = p.normal.rotated(alpha);
        out.panels.push_back(q);
    }
    return out;
}

namespace {

// Kernel grad E(x-y).n(x) of the double-layer-transposed operator,
// E(z) = -(1/2pi) ln|z|.
double kernel(const Vec2& x, const Vec2& y, const Vec2& nx) {
    const Vec2 d = x - y;
    return -d.dot(nx) / (2.0 * kPi * d.squared_norm());
}

Eigen::MatrixXd build_collocation_matrix(const InclusionShape& shape, double lambda) {
    const int n = shape.size();
    Eigen::MatrixXd A(n + 1, n + 1);
    A.setZero();
    for (int i = 0; i < n; ++i) {
        const Panel& pi = shape.panels[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const Panel& pj = shape.panels[static_cast<std::size_t>(j)];
            if (i == j) {
                // limiting value of the kernel on a C^1 boundary: -kappa/(4pi)
                A(i, j) = lambda / 2.0 - pi.curvature / (4.0 * kPi) * pi.length;
            } else {
                A(i, j) = kernel(pi.mid, pj.mid, pi.normal) * pj.length;
            }
        }
    }
    // zero-mean constraint with a Lagrange multiplier
    for (int j = 0; j < n; ++j) {
        A(n, j) = shape.panels[static_cast<std::size_t>(j)].length;
        A(j, n) = 1.0;
    }
    return A;
}

}  // namespace

PanelDensity solve_density(const InclusionShape& shape, double nu0, double nu1, const Vec2& g) {
    if (nu0 == nu1) {
        throw ValidationError("solve_density: contrast nu0 != nu1 required");
    }
    if (!std::isfinite(g.x) || !std::isfinite(g.y)) {
        throw ValidationError("solve_density: gradient must be finite");
    }
    const int n = shape.size();
    const double lambda = (nu0 + nu1) / (nu0 - nu1);
    const Eigen::MatrixXd A = build_collocation_matrix(shape, lambda);
    Eigen::VectorXd rhs(n + 1);
    for (int i = 0; i < n; ++i) {
        rhs[i] = g.dot(shape.panels[static_cast<std::size_t>(i)].normal);
    }
    rhs[n] = 0.0;

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd sol = lu.solve(rhs);
    const double rhs_scale = std::max(rhs.norm(), 1.0);
    const double residual = (A * sol - rhs).norm() / rhs_scale;
    if (!(residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "solve_density: collocation system residual " << residual
            << " above 1e-10 (singular system?)";
        throw SolverError(msg.str());
    }

    PanelDensity density;
    density.q.assign(sol.data(), sol.data() + n);
    return density;
}

Eigen::Matrix2d moment_matrix(const InclusionShape& shape) {
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    for (const auto& p : shape.panels) {
        const Eigen::Vector2d x(p.mid.x, p.mid.y);
        const Eigen::Vector2d nvec(p.normal.x, p.normal.y);
        M += p.length * x * nvec.transpose();
    }
    return M;
}

Eigen::Matrix2d disk_polarization_matrix(double nu0, double nu1) {
    return 2.0 * kPi * (nu0 - nu1) / (nu0 + nu1) * Eigen::Matrix2d::Identity();
}

PolarizationMatrix polarization_matrix(const InclusionShape& shape, double nu0, double nu1) {
    // First-moment identity int x n^T ds = |D| I doubles as a panelization check.
    const Eigen::Matrix2d M = moment_matrix(shape);
    const Eigen::Matrix2d deviation = M - shape.area * Eigen::Matrix2d::Identity();
    if (deviation.cwiseAbs().maxCoeff() > 5e-3 * shape.area) {
        throw SolverError("polarization_matrix: panelization violates the first-moment identity");
    }

    PolarizationMatrix out;
    out.nu0 = nu0;
    out.nu1 = nu1;
    const Vec2 axes[2] = {{1.0, 0.0}, {0.0, 1.0}};
    for (int c = 0; c < 2; ++c) {
        const PanelDensity density = solve_density(shape, nu0, nu1, axes[c]);
        Eigen::Vector2d col = Eigen::Vector2d::Zero();
        for (int i = 0; i < shape.size(); ++i) {
            const Panel& p = shape.panels[static_cast<std::size_t>(i)];
            col += p.length * density.q[static_cast<std::size_t>(i)] *
                   Eigen::Vector2d(p.mid.x, p.mid.y);
        }
        out.P.col(c) = col;
    }
    return out;
}

}  // namespace magopt
