#include "magopt/io.hpp"

#include <cstdio>
#include <ostream>

#include "magopt/errors.hpp"

namespace magopt {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_vtk(std::ostream& out, const Mesh& mesh, const std::string& title,
               const std::vector<std::pair<std::string, std::vector<double>>>& point_scalars,
               const std::vector<VtkCellScalars>& cell_scalars) {
    out << "# vtk DataFile Version 3.0\n";
    out << title << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (const auto& p : mesh.nodes()) {
        out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
    }
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles()) {
        out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << "\n";
    }
    out << "CELL_TYPES " << mesh.num_triangles() << "\n";
    for (int e = 0; e < mesh.num_triangles(); ++e) out << "5\n";

    if (!point_scalars.empty()) {
        out << "POINT_DATA " << mesh.num_nodes() << "\n";
        for (const auto& [name, values] : point_scalars) {
            if (values.size() != static_cast<std::size_t>(mesh.num_nodes())) {
                throw ValidationError("write_vtk: point scalar '" + name + "' has wrong length");
            }
            out << "SCALARS " << name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : values) out << format_double(v) << "\n";
        }
    }
    if (!cell_scalars.empty()) {
        out << "CELL_DATA " << mesh.num_triangles() << "\n";
        for (const auto& cs : cell_scalars) {
            if (cs.values.size() != static_cast<std::size_t>(mesh.num_triangles())) {
                throw ValidationError("write_vtk: cell scalar '" + cs.name +
                                      "' has wrong length");
            }
            out << "SCALARS " << cs.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : cs.values) out << format_double(v) << "\n";
        }
    }
}

std::vector<double> element_b_magnitude(const Mesh& mesh, const NodalField& u) {
    std::vector<double> b(static_cast<std::size_t>(mesh.num_triangles()));
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        b[static_cast<std::size_t>(e)] = mesh.element_gradient(u.values, e).norm();
    }
    return b;
}

std::vector<double> element_reluctivity_values(const Mesh& mesh, const BHModel& model,
                                               const DesignState& state, const NodalField& u) {
    std::vector<double> nu(static_cast<std::size_t>(mesh.num_triangles()));
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double s = mesh.element_gradient(u.values, e).norm();
        nu[static_cast<std::size_t>(e)] = reluctivity(model, state, mesh, e, s);
    }
    return nu;
}

std::vector<double> design_flag_values(const Mesh& mesh, const DesignState& state) {
    std::vector<double> flags(static_cast<std::size_t>(mesh.num_triangles()), -1.0);
    for (int e : mesh.design_elements()) {
        flags[static_cast<std::size_t>(e)] =
            state.is_on(mesh.design_index(e)) ? 1.0 : 0.0;
    }
    return flags;
}

void write_trace_csv(std::ostream& out, const GapCircle& gap, const std::vector<double>& b_rad,
                     const TargetCurve& target) {
    if (b_rad.size() != static_cast<std::size_t>(gap.size())) {
        throw ValidationError("write_trace_csv: trace length does not match the gap circle");
    }
    out << "theta,b_rad,b_target\n";
    for (int q = 0; q < gap.size(); ++q) {
        const double th = gap.theta[static_cast<std::size_t>(q)];
        out << format_double(th) << ',' << format_double(b_rad[static_cast<std::size_t>(q)])
            << ',' << format_double(target(th)) << "\n";
    }
}

void write_sensitivity_csv(std::ostream& out, const Mesh& mesh, const SensitivityField& sens) {
    out << "elem_id,centroid_x,centroid_y,onoff,topo\n";
    for (std::size_t k = 0; k < sens.elem_ids.size(); ++k) {
        const int e = sens.elem_ids[k];
        const Vec2 c = mesh.centroid(e);
        out << e << ',' << format_double(c.x) << ',' << format_double(c.y) << ','
            << format_double(sens.onoff[k]) << ',';
        if (k < sens.topo.size()) out << format_double(sens.topo[k]);
        out << "\n";
    }
}

void write_history_csv(std::ostream& out, const OptimizationHistory& history) {
    out << "iter,J,switched,reverted\n";
    for (const auto& rec : history.entries) {
        out << rec.iter << ',' << format_double(rec.J) << ',' << rec.switched << ','
            << rec.reverted << "\n";
    }
}

void write_design_csv(std::ostream& out, const Mesh& mesh,
                      const std::vector<std::uint8_t>& flags) {
    if (flags.size() != mesh.design_elements().size()) {
        throw ValidationError("write_design_csv: flag count does not match the design set");
    }
    out << "elem_id,flag\n";
    for (std::size_t k = 0; k < flags.size(); ++k) {
        out << mesh.design_elements()[k] << ',' << (flags[k] != 0 ? 1 : 0) << "\n";
    }
}

}  // namespace magopt
