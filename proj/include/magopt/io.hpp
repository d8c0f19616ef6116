#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "magopt/fem.hpp"
#include "magopt/objective.hpp"
#include "magopt/optimizer.hpp"
#include "magopt/sensitivity.hpp"

namespace magopt {

// Legacy ASCII VTK unstructured grid: triangle cells, optional point and
// cell scalars. No timestamps; output is byte-deterministic.
struct VtkCellScalars {
    std::string name;
    std::vector<double> values;
};

void write_vtk(std::ostream& out, const Mesh& mesh, const std::string& title,
               const std::vector<std::pair<std::string, std::vector<double>>>& point_scalars,
               const std::vector<VtkCellScalars>& cell_scalars);

// Per-element |B| = |grad u| and reluctivity values for export.
std::vector<double> element_b_magnitude(const Mesh& mesh, const NodalField& u);
std::vector<double> element_reluctivity_values(const Mesh& mesh, const BHModel& model,
                                               const DesignState& state, const NodalField& u);
std::vector<double> design_flag_values(const Mesh& mesh, const DesignState& state);

// CSV exports. All writers are deterministic.
void write_trace_csv(std::ostream& out, const GapCircle& gap, const std::vector<double>& b_rad,
                     const TargetCurve& target);
void write_sensitivity_csv(std::ostream& out, const Mesh& mesh, const SensitivityField& sens);
void write_history_csv(std::ostream& out, const OptimizationHistory& history);
void write_design_csv(std::ostream& out, const Mesh& mesh,
                      const std::vector<std::uint8_t>& flags);

std::string format_double(double v);

}  // namespace magopt
