#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "magopt/vec2.hpp"

namespace magopt {

enum class Region : std::uint8_t { Air, Iron, Design, Magnet };

std::string region_tag(Region region, int magnet_id);

struct Triangle {
    std::array<int, 3> v{};
    Region region = Region::Air;
    int magnet_id = -1;  // >= 1 iff region == Magnet
};

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    std::string marker = "DIRICHLET";
};

struct MagnetRecord {
    int id = 0;
    Vec2 magnetization;  // A/m
};

// Area and the constant gradients of the three P1 barycentric basis
// functions on one triangle. The gradients sum to zero.
struct ElementGeometry {
    double area = 0.0;
    std::array<Vec2, 3> grad_basis{};
};

ElementGeometry compute_element_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2);

// Quarter model of the interior-permanent-magnet motor. Radii in meters,
// strictly increasing. Angles in radians.
struct MotorGeometry {
    double r_shaft = 0.015;
    double r_rotor_iron = 0.040;
    double r_magnet_outer = 0.046;
    double r_rotor_surface = 0.050;
    double r_gap_circle = 0.0525;
    double r_stator_bore = 0.055;
    double r_stator_yoke = 0.080;
    // Two magnet pockets per quarter, radially magnetized with alternating sign.
    double magnet_span = 35.0 * 3.14159265358979323846 / 180.0;
    std::array<double, 2> magnet_centers = {22.5 * 3.14159265358979323846 / 180.0,
                                            67.5 * 3.14159265358979323846 / 180.0};
    double magnet_strength = 9.0e5;  // |M|, A/m

    void validate() const;
};

class Mesh {
  public:
    Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges, std::vector<MagnetRecord> magnets);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    const std::vector<MagnetRecord>& magnets() const { return magnets_; }

    const Vec2& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const Triangle& triangle(int e) const { return triangles_[static_cast<std::size_t>(e)]; }

    const ElementGeometry& element_geometry(int e) const {
        return geometry_[static_cast<std::size_t>(e)];
    }
    Vec2 centroid(int e) const;
    double element_diameter(int e) const;

    // Ids of DESIGN triangles, ascending.
    const std::vector<int>& design_elements() const { return design_elements_; }
    // Position of element e in design_elements(), or -1.
    int design_index(int e) const { return design_index_[static_cast<std::size_t>(e)]; }

    bool is_dirichlet_node(int i) const { return dirichlet_node_[static_cast<std::size_t>(i)]; }
    const Vec2& magnetization_of(int magnet_id) const;

    // Edge-adjacent neighbor across local edge k (opposite vertex k), or -1.
    int neighbor(int e, int k) const { return neighbors_[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)]; }

    // Element containing p; starts from `hint` and walks across edges,
    // falling back to a full scan. Returns -1 if p is outside the mesh.
    int locate(const Vec2& p, int hint = -1) const;

    double total_area() const { return total_area_; }

    // Gradient of a P1 coefficient vector on element e.
    Vec2 element_gradient(const std::vector<double>& nodal_values, int e) const;

  private:
    void validate() const;
    void build_derived();

    std::vector<Vec2> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<MagnetRecord> magnets_;

    std::vector<ElementGeometry> geometry_;
    std::vector<std::array<int, 3>> neighbors_;
    std::vector<bool> dirichlet_node_;
    std::vector<int> design_elements_;
    std::vector<int> design_index_;
    double total_area_ = 0.0;
};

// Structured polar mesh of the quarter motor: radial rings per band, uniform
// angular sectors, each quad split into two triangles. Deterministic.
Mesh generate_motor_mesh(const MotorGeometry& geom, double h);

// Structured mesh of [0,w] x [0,h_len] with nx-by-ny quads, all edges Dirichlet.
Mesh generate_rectangle_mesh(int nx, int ny, double w = 1.0, double h_len = 1.0,
                             Region region = Region::Iron);

// Text format, line oriented:
//   mesh2d 1
//   nodes N        followed by N lines "x y"
//   triangles M    followed by M lines "i j k TAG"   (TAG: AIR IRON DESIGN MAGNET<id>)
//   magnets P      followed by P lines "id Mx My"
//   boundary B     followed by B lines "i j MARKER"
// '#' starts a comment.
Mesh load_mesh(std::istream& in);
void save_mesh(std::ostream& out, const Mesh& mesh);
Mesh load_mesh_file(const std::string& path);
void save_mesh_file(const std::string& path, const Mesh& mesh);

}  // namespace magopt
