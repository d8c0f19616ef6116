#pragma once

#include <vector>

#include "magopt/fem.hpp"
#include "magopt/objective.hpp"
#include "magopt/polarization.hpp"

namespace magopt {

// Per-design-element ON/OFF sensitivities dJ/dnu_k, optionally alongside the
// pointwise topological derivative sampled at element centroids. Entries are
// aligned with mesh.design_elements().
struct SensitivityField {
    std::vector<int> elem_ids;
    std::vector<double> onoff;
    std::vector<double> topo;  // empty in nonlinear mode
    MaterialMode mode = MaterialMode::Linear;
    int iteration = -1;
};

// dJ/dnu_k = area(T_k) * (grad u . grad p)|_{T_k} for every design element.
SensitivityField onoff_sensitivities(const Mesh& mesh, const DesignState& state,
                                     const NodalField& u, const NodalField& p);

// G(centroid) = nu1 * grad u0^T P grad p0; P from the polarization module or,
// when null, the unit-disk closed form. Linear state equation only.
std::vector<double> topological_derivative_field(const Mesh& mesh, const NodalField& u0,
                                                 const NodalField& p0, double nu0, double nu1,
                                                 MaterialMode mode,
                                                 const PolarizationMatrix* P = nullptr);

// Central difference (J(nu_k+h) - J(nu_k-h)) / 2h via two full state solves.
double sensitivity_fd_oracle(const Mesh& mesh, const BHModel& model, const DesignState& state,
                             const GapCircle& gap, const TargetCurve& target, int elem_id,
                             double h, const SolveOptions& opts = {});

// Design elements all of whose edge neighbors are DESIGN elements; the
// equivalence statistics are restricted to these.
std::vector<int> interior_design_elements(const Mesh& mesh);

}  // namespace magopt
