#pragma once

#include <random>
#include <vector>

#include "magopt/fem.hpp"
#include "magopt/mesh.hpp"

namespace magopt::testing {

// Single counterclockwise triangle (0,0)-(1,0)-(0,1) tagged as requested.
inline Mesh one_triangle_mesh(Region region = Region::Design) {
    std::vector<Vec2> nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    std::vector<Triangle> tris = {{{0, 1, 2}, region, -1}};
    std::vector<BoundaryEdge> boundary = {{0, 1, "DIRICHLET"},
                                          {1, 2, "DIRICHLET"},
                                          {2, 0, "DIRICHLET"}};
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary), {});
}

// Unit square split along the (0,0)-(1,1) diagonal.
inline Mesh two_triangle_square(Region region = Region::Iron) {
    std::vector<Vec2> nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    std::vector<Triangle> tris = {{{0, 1, 2}, region, -1}, {{0, 2, 3}, region, -1}};
    std::vector<BoundaryEdge> boundary = {{0, 1, "DIRICHLET"},
                                          {1, 2, "DIRICHLET"},
                                          {2, 3, "DIRICHLET"},
                                          {3, 0, "DIRICHLET"}};
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary), {});
}

// Square magnet patch inside an iron square: nx-by-nx grid on [0,1]^2 with a
// centered magnet block of the given half-width (in cells).
inline Mesh square_with_magnet(int nx, Vec2 magnetization, int magnet_halfwidth = 1,
                               Region outer = Region::Iron) {
    std::vector<Vec2> nodes;
    for (int j = 0; j <= nx; ++j) {
        for (int i = 0; i <= nx; ++i) {
            nodes.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / nx);
        }
    }
    auto node_id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Triangle> tris;
    const int mid = nx / 2;
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool in_magnet = std::abs(i - mid) < magnet_halfwidth &&
                                   std::abs(j - mid) < magnet_halfwidth;
            const Region region = in_magnet ? Region::Magnet : outer;
            const int id = in_magnet ? 1 : -1;
            const int a = node_id(i, j), b = node_id(i + 1, j), c = node_id(i + 1, j + 1),
                      d = node_id(i, j + 1);
            tris.push_back({{a, b, c}, region, id});
            tris.push_back({{a, c, d}, region, id});
        }
    }
    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < nx; ++i) {
        boundary.push_back({node_id(i, 0), node_id(i + 1, 0), "DIRICHLET"});
        boundary.push_back({node_id(i, nx), node_id(i + 1, nx), "DIRICHLET"});
        boundary.push_back({node_id(0, i), node_id(0, i + 1), "DIRICHLET"});
        boundary.push_back({node_id(nx, i), node_id(nx, i + 1), "DIRICHLET"});
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary),
                {{1, magnetization}});
}

// Coarse quarter-motor geometry producing a mesh under 500 triangles.
inline MotorGeometry coarse_motor_geometry() { return MotorGeometry{}; }

inline Mesh coarse_motor_mesh() { return generate_motor_mesh(coarse_motor_geometry(), 0.008); }

inline std::mt19937 rng(unsigned seed = 20240817u) { return std::mt19937(seed); }

inline NodalField random_field(const Mesh& mesh, std::mt19937& gen, double scale = 1.0,
                               bool zero_dirichlet = true) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    NodalField f = NodalField::zeros(mesh);
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        if (zero_dirichlet && mesh.is_dirichlet_node(i)) continue;
        f.values[static_cast<std::size_t>(i)] = dist(gen);
    }
    return f;
}

}  // namespace magopt::testing
