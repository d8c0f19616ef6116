#include "magopt/sensitivity.hpp"

#include <cmath>

#include "magopt/errors.hpp"

namespace magopt {

SensitivityField onoff_sensitivities(const Mesh& mesh, const DesignState& state,
                                     const NodalField& u, const NodalField& p) {
    if (u.values.size() != p.values.size() ||
        u.values.size() != static_cast<std::size_t>(mesh.num_nodes())) {
        throw ValidationError("onoff_sensitivities: field lengths do not match the mesh");
    }
    SensitivityField sens;
    sens.mode = state.mode;
    sens.elem_ids = mesh.design_elements();
    sens.onoff.reserve(sens.elem_ids.size());
    for (int e : sens.elem_ids) {
        const Vec2 gu = mesh.element_gradient(u.values, e);
        const Vec2 gp = mesh.element_gradient(p.values, e);
        sens.onoff.push_back(mesh.element_geometry(e).area * gu.dot(gp));
    }
    return sens;
}

std::vector<double> topological_derivative_field(const Mesh& mesh, const NodalField& u0,
                                                 const NodalField& p0, double nu0, double nu1,
                                                 MaterialMode mode,
                                                 const PolarizationMatrix* P) {
    if (mode == MaterialMode::Nonlinear) {
        throw ValidationError(
            "topological_derivative_field: only supported for the linear state equation");
    }
    Eigen::Matrix2d Pm;
    if (P != nullptr) {
        Pm = P->P;
    } else {
        Pm = disk_polarization_matrix(nu0, nu1);
    }
    std::vector<double> topo;
    topo.reserve(mesh.design_elements().size());
    for (int e : mesh.design_elements()) {
        const Vec2 gu = mesh.element_gradient(u0.values, e);
        const Vec2 gp = mesh.element_gradient(p0.values, e);
        const Eigen::Vector2d a(gu.x, gu.y);
        const Eigen::Vector2d b(gp.x, gp.y);
        topo.push_back(nu1 * a.dot(Pm * b));
    }
    return topo;
}

double sensitivity_fd_oracle(const Mesh& mesh, const BHModel& model, const DesignState& state,
                             const GapCircle& gap, const TargetCurve& target, int elem_id,
                             double h, const SolveOptions& opts) {
    if (mesh.design_index(elem_id) < 0) {
        throw ValidationError("sensitivity_fd_oracle: element is not in the design region");
    }
    if (!(h > 0.0)) throw ValidationError("sensitivity_fd_oracle: step must be positive");

    auto evaluate = [&](double delta) {
        DesignState perturbed = state;
        perturbed.perturbed_elem = elem_id;
        perturbed.perturb_delta = delta;
        const NodalField u = solve_state(mesh, model, perturbed, opts);
        return objective(mesh, gap, target, u);
    };
    const double j_plus = evaluate(h);
    const double j_minus = evaluate(-h);
    return (j_plus - j_minus) / (2.0 * h);
}

std::vector<int> interior_design_elements(const Mesh& mesh) {
    std::vector<int> interior;
    for (int e : mesh.design_elements()) {
        bool inner = true;
        for (int k = 0; k < 3; ++k) {
            const int nb = mesh.neighbor(e, k);
            if (nb < 0 || mesh.triangle(nb).region != Region::Design) {
                inner = false;
                break;
            }
        }
        if (inner) interior.push_back(e);
    }
    return interior;
}

}  // namespace magopt
