#include "magopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "magopt/errors.hpp"

namespace magopt {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string node_str(int i) { return "node " + std::to_string(i); }
}  // namespace

std::string region_tag(Region region, int magnet_id) {
    switch (region) {
        case Region::Air:
            return "AIR";
        case Region::Iron:
            return "IRON";
        case Region::Design:
            return "DESIGN";
        case Region::Magnet:
            return "MAGNET" + std::to_string(magnet_id);
    }
    return "AIR";
}

ElementGeometry compute_element_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const double twice_area = cross(p1 - p0, p2 - p0);
    if (!(twice_area > 0.0) || !std::isfinite(twice_area)) {
        throw ValidationError("degenerate or clockwise triangle (signed area " +
                              std::to_string(0.5 * twice_area) + ")");
    }
    ElementGeometry g;
    g.area = 0.5 * twice_area;
    // grad of barycentric coordinate k: rotated opposite edge / (2A)
    g.grad_basis[0] = (p2 - p1).perp() / twice_area;
    g.grad_basis[1] = (p0 - p2).perp() / twice_area;
    g.grad_basis[2] = (p1 - p0).perp() / twice_area;
    return g;
}

void MotorGeometry::validate() const {
    const double r[] = {r_shaft,       r_rotor_iron, r_magnet_outer, r_rotor_surface,
                        r_gap_circle,  r_stator_bore, r_stator_yoke};
    const char* names[] = {"r_shaft",       "r_rotor_iron", "r_magnet_outer", "r_rotor_surface",
                           "r_gap_circle",  "r_stator_bore", "r_stator_yoke"};
    if (!(r[0] > 0.0)) throw ValidationError("geometry: r_shaft must be positive");
    for (int i = 0; i + 1 < 7; ++i) {
        if (!(r[i] < r[i + 1])) {
            throw ValidationError(std::string("geometry: radii must be strictly increasing (") +
                                  names[i] + " >= " + names[i + 1] + ")");
        }
    }
    if (!(magnet_span > 0.0) || magnet_span >= kPi / 2.0) {
        throw ValidationError("geometry: magnet_span must lie in (0, pi/2)");
    }
    for (double c : magnet_centers) {
        if (c - magnet_span / 2.0 < 0.0 || c + magnet_span / 2.0 > kPi / 2.0) {
            throw ValidationError("geometry: magnet pocket leaves the quarter sector");
        }
    }
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges, std::vector<MagnetRecord> magnets)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      magnets_(std::move(magnets)) {
    validate();
    build_derived();
}

void Mesh::validate() const {
    const int nn = static_cast<int>(nodes_.size());
    if (nn < 3) throw ValidationError("mesh: needs at least 3 nodes");
    if (triangles_.empty()) throw ValidationError("mesh: needs at least 1 triangle");

    std::set<int> magnet_ids;
    for (const auto& m : magnets_) {
        if (m.id <= 0) throw ValidationError("mesh: magnet ids must be positive");
        if (!magnet_ids.insert(m.id).second) {
            throw ValidationError("mesh: duplicate magnet record id " + std::to_string(m.id));
        }
    }

    for (std::size_t e = 0; e < triangles_.size(); ++e) {
        const Triangle& t = triangles_[e];
        for (int v : t.v) {
            if (v < 0 || v >= nn) {
                throw ValidationError("mesh: triangle " + std::to_string(e) +
                                      " references missing node " + std::to_string(v));
            }
        }
        if (t.v[0] == t.v[1] || t.v[1] == t.v[2] || t.v[0] == t.v[2]) {
            throw ValidationError("mesh: triangle " + std::to_string(e) + " repeats a node");
        }
        const double twice_area =
            cross(node(t.v[1]) - node(t.v[0]), node(t.v[2]) - node(t.v[0]));
        if (!(twice_area > 0.0)) {
            throw ValidationError("mesh: triangle " + std::to_string(e) +
                                  " has nonpositive area (must be counterclockwise)");
        }
        if (t.region == Region::Magnet) {
            if (magnet_ids.count(t.magnet_id) == 0) {
                throw ValidationError("mesh: triangle " + std::to_string(e) +
                                      " references missing magnet record " +
                                      std::to_string(t.magnet_id));
            }
        } else if (t.magnet_id != -1) {
            throw ValidationError("mesh: triangle " + std::to_string(e) +
                                  " carries a magnet id without MAGNET tag");
        }
    }

    // Boundary edges must be exactly the edges incident to one triangle.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : triangles_) {
        for (int k = 0; k < 3; ++k) {
            int a = t.v[k];
            int b = t.v[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_count[{a, b}] += 1;
        }
    }
    std::set<std::pair<int, int>> topological;
    for (const auto& [edge, count] : edge_count) {
        if (count > 2) {
            throw ValidationError("mesh: edge " + node_str(edge.first) + "-" +
                                  node_str(edge.second) + " shared by more than two triangles");
        }
        if (count == 1) topological.insert(edge);
    }
    std::set<std::pair<int, int>> declared;
    for (const auto& be : boundary_edges_) {
        int a = be.a;
        int b = be.b;
        if (a < 0 || a >= nn || b < 0 || b >= nn) {
            throw ValidationError("mesh: boundary edge references missing node");
        }
        if (a > b) std::swap(a, b);
        if (!declared.insert({a, b}).second) {
            throw ValidationError("mesh: duplicate boundary edge " + node_str(a) + "-" +
                                  node_str(b));
        }
    }
    if (declared != topological) {
        throw ValidationError("mesh: boundary edges do not cover exactly the topological "
                              "boundary (" +
                              std::to_string(declared.size()) + " declared, " +
                              std::to_string(topological.size()) + " topological)");
    }
}

void Mesh::build_derived() {
    const std::size_t ne = triangles_.size();
    geometry_.reserve(ne);
    total_area_ = 0.0;
    for (const auto& t : triangles_) {
        geometry_.push_back(compute_element_geometry(node(t.v[0]), node(t.v[1]), node(t.v[2])));
        total_area_ += geometry_.back().area;
    }

    // Edge-based adjacency.
    neighbors_.assign(ne, {-1, -1, -1});
    std::map<std::pair<int, int>, std::pair<int, int>> first_seen;  // edge -> (elem, local)
    for (std::size_t e = 0; e < ne; ++e) {
        for (int k = 0; k < 3; ++k) {
            // local edge k is opposite vertex k
            int a = triangles_[e].v[(k + 1) % 3];
            int b = triangles_[e].v[(k + 2) % 3];
            if (a > b) std::swap(a, b);
            auto it = first_seen.find({a, b});
            if (it == first_seen.end()) {
                first_seen[{a, b}] = {static_cast<int>(e), k};
            } else {
                neighbors_[e][static_cast<std::size_t>(k)] = it->second.first;
                neighbors_[static_cast<std::size_t>(it->second.first)]
                          [static_cast<std::size_t>(it->second.second)] = static_cast<int>(e);
            }
        }
    }

    dirichlet_node_.assign(nodes_.size(), false);
    for (const auto& be : boundary_edges_) {
        if (be.marker == "DIRICHLET") {
            dirichlet_node_[static_cast<std::size_t>(be.a)] = true;
            dirichlet_node_[static_cast<std::size_t>(be.b)] = true;
        }
    }

    design_index_.assign(ne, -1);
    for (std::size_t e = 0; e < ne; ++e) {
        if (triangles_[e].region == Region::Design) {
            design_index_[e] = static_cast<int>(design_elements_.size());
            design_elements_.push_back(static_cast<int>(e));
        }
    }
}

Vec2 Mesh::centroid(int e) const {
    const Triangle& t = triangle(e);
    return (node(t.v[0]) + node(t.v[1]) + node(t.v[2])) / 3.0;
}

double Mesh::element_diameter(int e) const {
    const Triangle& t = triangle(e);
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
        d = std::max(d, (node(t.v[k]) - node(t.v[(k + 1) % 3])).norm());
    }
    return d;
}

const Vec2& Mesh::magnetization_of(int magnet_id) const {
    for (const auto& m : magnets_) {
        if (m.id == magnet_id) return m.magnetization;
    }
    throw ValidationError("mesh: unknown magnet id " + std::to_string(magnet_id));
}

Vec2 Mesh::element_gradient(const std::vector<double>& nodal_values, int e) const {
    const Triangle& t = triangle(e);
    const ElementGeometry& g = element_geometry(e);
    Vec2 grad;
    for (int k = 0; k < 3; ++k) {
        grad += g.grad_basis[static_cast<std::size_t>(k)] *
                nodal_values[static_cast<std::size_t>(t.v[k])];
    }
    return grad;
}

namespace {

// Barycentric coordinates of p in element e; min coordinate signals containment.
std::array<double, 3> barycentric(const Mesh& mesh, int e, const Vec2& p) {
    const Triangle& t = mesh.triangle(e);
    const Vec2& p0 = mesh.node(t.v[0]);
    const Vec2& p1 = mesh.node(t.v[1]);
    const Vec2& p2 = mesh.node(t.v[2]);
    const double inv = 1.0 / cross(p1 - p0, p2 - p0);
    const double l1 = cross(p - p0, p2 - p0) * inv;
    const double l2 = cross(p1 - p0, p - p0) * inv;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

int Mesh::locate(const Vec2& p, int hint) const {
    constexpr double kTol = 1e-12;
    const int ne = num_triangles();
    if (hint >= 0 && hint < ne) {
        int current = hint;
        for (int step = 0; step < 2 * ne; ++step) {
            const auto bc = barycentric(*this, current, p);
            int worst = 0;
            for (int k = 1; k < 3; ++k) {
                if (bc[static_cast<std::size_t>(k)] < bc[static_cast<std::size_t>(worst)]) worst = k;
            }
            if (bc[static_cast<std::size_t>(worst)] >= -kTol) return current;
            const int next = neighbor(current, worst);
            if (next < 0) break;  // walked out; fall through to the scan
            current = next;
        }
    }
    for (int e = 0; e < ne; ++e) {
        const auto bc = barycentric(*this, e, p);
        if (bc[0] >= -kTol && bc[1] >= -kTol && bc[2] >= -kTol) return e;
    }
    return -1;
}

namespace {

// Radial subdivision of one band, at most h per ring. The air-gap band keeps
// an odd ring count so no ring boundary coincides with the gap circle radius.
int ring_count(double width, double h, bool force_odd) {
    int n = std::max(1, static_cast<int>(std::ceil(width / h - 1e-12)));
    if (force_odd && n % 2 == 0) n += 1;
    return n;
}

}  // namespace

Mesh generate_motor_mesh(const MotorGeometry& geom, double h) {
    geom.validate();
    if (!(h > 0.0)) throw ValidationError("generate_motor_mesh: h must be positive");

    struct Band {
        double r0, r1;
        Region region;
        bool is_magnet_band = false;
        bool force_odd = false;
    };
    const std::vector<Band> bands = {
        {geom.r_shaft, geom.r_rotor_iron, Region::Iron, false, false},
        {geom.r_rotor_iron, geom.r_magnet_outer, Region::Iron, true, false},
        {geom.r_magnet_outer, geom.r_rotor_surface, Region::Design, false, false},
        {geom.r_rotor_surface, geom.r_stator_bore, Region::Air, false, true},
        {geom.r_stator_bore, geom.r_stator_yoke, Region::Iron, false, false},
    };

    // Radial node positions, band aligned.
    std::vector<double> radii = {bands.front().r0};
    std::vector<std::pair<Region, bool>> ring_region;  // per ring: region, in-magnet-band
    for (const auto& band : bands) {
        const int n = ring_count(band.r1 - band.r0, h, band.force_odd);
        if (n < 1) throw ValidationError("generate_motor_mesh: band without element row");
        for (int i = 1; i <= n; ++i) {
            radii.push_back(band.r0 + (band.r1 - band.r0) * i / n);
            ring_region.emplace_back(band.region, band.is_magnet_band);
        }
    }

    // Angular sectors: multiples of 18 align sector boundaries with the
    // 5-degree grid of the default magnet pockets.
    const double r_out = bands.back().r1;
    int n_theta = std::max(1, static_cast<int>(std::ceil((kPi / 2.0) * r_out / h - 1e-12)));
    n_theta = 18 * ((n_theta + 17) / 18);
    const double dtheta = (kPi / 2.0) / n_theta;

    const int n_rings = static_cast<int>(ring_region.size());
    const int nodes_per_ring = n_theta + 1;
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>((n_rings + 1) * nodes_per_ring));
    for (int i = 0; i <= n_rings; ++i) {
        for (int j = 0; j <= n_theta; ++j) {
            const double r = radii[static_cast<std::size_t>(i)];
            const double th = j * dtheta;
            nodes.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    }
    auto node_id = [&](int i, int j) { return i * nodes_per_ring + j; };

    std::vector<MagnetRecord> magnets;
    for (std::size_t m = 0; m < geom.magnet_centers.size(); ++m) {
        const double c = geom.magnet_centers[m];
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        magnets.push_back({static_cast<int>(m) + 1,
                           Vec2(std::cos(c), std::sin(c)) * (sign * geom.magnet_strength)});
    }

    auto cell_region = [&](int ring, int sector, int& magnet_id) -> Region {
        magnet_id = -1;
        const auto [region, in_magnet_band] = ring_region[static_cast<std::size_t>(ring)];
        if (!in_magnet_band) return region;
        const double th_mid = (sector + 0.5) * dtheta;
        for (std::size_t m = 0; m < geom.magnet_centers.size(); ++m) {
            if (std::abs(th_mid - geom.magnet_centers[m]) <= geom.magnet_span / 2.0) {
                magnet_id = static_cast<int>(m) + 1;
                return Region::Magnet;
            }
        }
        return Region::Iron;
    };

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n_rings * n_theta));
    for (int i = 0; i < n_rings; ++i) {
        for (int j = 0; j < n_theta; ++j) {
            int magnet_id = -1;
            const Region region = cell_region(i, j, magnet_id);
            const int a = node_id(i, j);
            const int b = node_id(i + 1, j);
            const int c = node_id(i + 1, j + 1);
            const int d = node_id(i, j + 1);
            triangles.push_back({{a, b, c}, region, magnet_id});
            triangles.push_back({{a, c, d}, region, magnet_id});
        }
    }

    std::vector<BoundaryEdge> boundary;
    for (int j = 0; j < n_theta; ++j) {  // inner and outer arcs
        boundary.push_back({node_id(0, j), node_id(0, j + 1), "DIRICHLET"});
        boundary.push_back({node_id(n_rings, j), node_id(n_rings, j + 1), "DIRICHLET"});
    }
    for (int i = 0; i < n_rings; ++i) {  // the two straight symmetry cuts
        boundary.push_back({node_id(i, 0), node_id(i + 1, 0), "DIRICHLET"});
        boundary.push_back({node_id(i, n_theta), node_id(i + 1, n_theta), "DIRICHLET"});
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(boundary), std::move(magnets));
}

Mesh generate_rectangle_mesh(int nx, int ny, double w, double h_len, Region region) {
    if (nx < 1 || ny < 1) throw ValidationError("generate_rectangle_mesh: need nx, ny >= 1");
    if (!(w > 0.0) || !(h_len > 0.0)) {
        throw ValidationError("generate_rectangle_mesh: need positive extents");
    }
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            nodes.emplace_back(w * i / nx, h_len * j / ny);
        }
    }
    auto node_id = [&](int i, int j) { return j * (nx + 1) + i; };

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = node_id(i, j);
            const int b = node_id(i + 1, j);
            const int c = node_id(i + 1, j + 1);
            const int d = node_id(i, j + 1);
            triangles.push_back({{a, b, c}, region, -1});
            triangles.push_back({{a, c, d}, region, -1});
        }
    }

    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < nx; ++i) {
        boundary.push_back({node_id(i, 0), node_id(i + 1, 0), "DIRICHLET"});
        boundary.push_back({node_id(i, ny), node_id(i + 1, ny), "DIRICHLET"});
    }
    for (int j = 0; j < ny; ++j) {
        boundary.push_back({node_id(0, j), node_id(0, j + 1), "DIRICHLET"});
        boundary.push_back({node_id(nx, j), node_id(nx, j + 1), "DIRICHLET"});
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(boundary), {});
}

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;

    // Next non-empty, non-comment line.
    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const auto begin = raw.find_first_not_of(" \t\r");
            if (begin == std::string::npos) continue;
            const auto end = raw.find_last_not_of(" \t\r");
            out = raw.substr(begin, end - begin + 1);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("mesh file line " + std::to_string(line_no) + ": " + msg);
    }
};

Region parse_tag(const std::string& tag, int& magnet_id, LineReader& reader) {
    magnet_id = -1;
    if (tag == "AIR") return Region::Air;
    if (tag == "IRON") return Region::Iron;
    if (tag == "DESIGN") return Region::Design;
    if (tag.rfind("MAGNET", 0) == 0) {
        try {
            magnet_id = std::stoi(tag.substr(6));
        } catch (const std::exception&) {
            reader.fail("bad magnet tag '" + tag + "'");
        }
        return Region::Magnet;
    }
    reader.fail("unknown region tag '" + tag + "'");
}

}  // namespace

Mesh load_mesh(std::istream& in) {
    LineReader reader{in};
    std::string line;
    if (!reader.next(line) || line != "mesh2d 1") {
        reader.fail("expected header 'mesh2d 1'");
    }

    auto expect_count = [&](const std::string& keyword) -> int {
        if (!reader.next(line)) reader.fail("unexpected end of file, expected '" + keyword + "'");
        std::istringstream ss(line);
        std::string word;
        long count = -1;
        if (!(ss >> word >> count) || word != keyword || count < 0) {
            reader.fail("expected '" + keyword + " <count>', got '" + line + "'");
        }
        return static_cast<int>(count);
    };

    const int nn = expect_count("nodes");
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nn));
    for (int i = 0; i < nn; ++i) {
        if (!reader.next(line)) reader.fail("missing node line");
        std::istringstream ss(line);
        Vec2 p;
        if (!(ss >> p.x >> p.y)) reader.fail("bad node line '" + line + "'");
        nodes.push_back(p);
    }

    const int nt = expect_count("triangles");
    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(nt));
    for (int e = 0; e < nt; ++e) {
        if (!reader.next(line)) reader.fail("missing triangle line");
        std::istringstream ss(line);
        Triangle t;
        std::string tag;
        if (!(ss >> t.v[0] >> t.v[1] >> t.v[2] >> tag)) {
            reader.fail("bad triangle line '" + line + "'");
        }
        t.region = parse_tag(tag, t.magnet_id, reader);
        triangles.push_back(t);
    }

    const int nm = expect_count("magnets");
    std::vector<MagnetRecord> magnets;
    magnets.reserve(static_cast<std::size_t>(nm));
    for (int m = 0; m < nm; ++m) {
        if (!reader.next(line)) reader.fail("missing magnet line");
        std::istringstream ss(line);
        MagnetRecord rec;
        if (!(ss >> rec.id >> rec.magnetization.x >> rec.magnetization.y)) {
            reader.fail("bad magnet line '" + line + "'");
        }
        magnets.push_back(rec);
    }

    const int nb = expect_count("boundary");
    std::vector<BoundaryEdge> boundary;
    boundary.reserve(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        if (!reader.next(line)) reader.fail("missing boundary line");
        std::istringstream ss(line);
        BoundaryEdge be;
        if (!(ss >> be.a >> be.b >> be.marker)) reader.fail("bad boundary line '" + line + "'");
        boundary.push_back(be);
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(boundary), std::move(magnets));
}

void save_mesh(std::ostream& out, const Mesh& mesh) {
    char buf[96];
    out << "mesh2d 1\n";
    out << "nodes " << mesh.num_nodes() << "\n";
    for (const auto& p : mesh.nodes()) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    out << "triangles " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles()) {
        out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' '
            << region_tag(t.region, t.magnet_id) << "\n";
    }
    out << "magnets " << mesh.magnets().size() << "\n";
    for (const auto& m : mesh.magnets()) {
        std::snprintf(buf, sizeof(buf), "%d %.17g %.17g\n", m.id, m.magnetization.x,
                      m.magnetization.y);
        out << buf;
    }
    out << "boundary " << mesh.boundary_edges().size() << "\n";
    for (const auto& be : mesh.boundary_edges()) {
        out << be.a << ' ' << be.b << ' ' << be.marker << "\n";
    }
}

Mesh load_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mesh file '" + path + "'");
    return load_mesh(in);
}

void save_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write mesh file '" + path + "'");
    save_mesh(out, mesh);
}

}  // namespace magopt
