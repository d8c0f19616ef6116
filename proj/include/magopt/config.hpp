#pragma once

#include <map>
#include <string>

#include "magopt/fem.hpp"
#include "magopt/mesh.hpp"
#include "magopt/optimizer.hpp"

namespace magopt {

// Complete run configuration. Text format: "[section]" headers with
// "key = value" lines, '#' comments, SI units throughout.
struct RunConfig {
    MotorGeometry geometry;
    double mesh_h = 0.002;
    std::string mesh_path;  // overrides the generator when nonempty

    MaterialMode mode = MaterialMode::Linear;
    double nu0 = kNu0Air;
    double nu_r = 1.0 / 5100.0;
    std::string curve = "analytic";  // "analytic" or "table"
    double curve_s0 = 1.1e6;
    double curve_exponent = 4.0;
    std::string bh_table_path;

    double target_amplitude = 0.5;
    double target_frequency = 4.0;
    int n_quadrature = 720;
    double tangent_sign = 1.0;

    SolveOptions solver;
    OptimizerConfig optimizer;

    std::string out_dir = "out";
    bool write_vtk = true;
    bool write_snapshots = true;

    void validate() const;

    Mesh make_mesh() const;
    BHModel make_model() const;
    TargetCurve make_target() const;
    GapCircle make_gap(const Mesh& mesh) const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config_file(const std::string& path);
std::string dump_config(const RunConfig& cfg);

}  // namespace magopt
