#include "magopt/objective.hpp"

#include <cmath>
#include <sstream>

#include "magopt/errors.hpp"

namespace magopt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TargetCurve TargetCurve::sine(double amplitude, double frequency) {
    return TargetCurve{[amplitude, frequency](double theta) {
        return amplitude * std::sin(frequency * theta);
    }};
}

TargetCurve TargetCurve::zero() {
    return TargetCurve{[](double) { return 0.0; }};
}

GapCircle build_gap_circle(const Mesh& mesh, double radius, int n_q, double tangent_sign) {
    if (!(radius > 0.0)) throw ValidationError("build_gap_circle: radius must be positive");
    if (n_q < 8) throw ValidationError("build_gap_circle: need at least 8 quadrature points");
    if (tangent_sign != 1.0 && tangent_sign != -1.0) {
        throw ValidationError("build_gap_circle: tangent_sign must be +1 or -1");
    }

    GapCircle gap;
    gap.radius = radius;
    gap.tangent_sign = tangent_sign;
    gap.theta.reserve(static_cast<std::size_t>(n_q));
    const double dtheta = (kPi / 2.0) / n_q;
    int hint = -1;
    for (int q = 0; q < n_q; ++q) {
        const double th = (q + 0.5) * dtheta;
        const Vec2 p{radius * std::cos(th), radius * std::sin(th)};
        const int e = mesh.locate(p, hint);
        if (e < 0) {
            std::ostringstream msg;
            msg << "build_gap_circle: point at theta=" << th << " lies outside the mesh";
            throw ValidationError(msg.str());
        }
        if (mesh.triangle(e).region != Region::Air) {
            std::ostringstream msg;
            msg << "build_gap_circle: circle not inside the air gap (element " << e
                << " at theta=" << th << " is "
                << region_tag(mesh.triangle(e).region, mesh.triangle(e).magnet_id) << ")";
            throw ValidationError(msg.str());
        }
        hint = e;
        gap.theta.push_back(th);
        gap.weight.push_back(radius * dtheta);
        gap.elem.push_back(e);
        gap.tangent.push_back(Vec2{-std::sin(th), std::cos(th)} * tangent_sign);
    }
    return gap;
}

std::vector<double> radial_flux_trace(const Mesh& mesh, const GapCircle& gap,
                                      const NodalField& u) {
    std::vector<double> b(static_cast<std::size_t>(gap.size()));
    for (int q = 0; q < gap.size(); ++q) {
        const Vec2 grad = mesh.element_gradient(u.values, gap.elem[static_cast<std::size_t>(q)]);
        b[static_cast<std::size_t>(q)] = grad.dot(gap.tangent[static_cast<std::size_t>(q)]);
    }
    return b;
}

double objective(const Mesh& mesh, const GapCircle& gap, const TargetCurve& target,
                 const NodalField& u) {
    const auto b = radial_flux_trace(mesh, gap, u);
    double J = 0.0;
    for (int q = 0; q < gap.size(); ++q) {
        const double diff =
            b[static_cast<std::size_t>(q)] - target(gap.theta[static_cast<std::size_t>(q)]);
        J += gap.weight[static_cast<std::size_t>(q)] * diff * diff;
    }
    return J;
}

std::vector<double> objective_gradient_nodal(const Mesh& mesh, const GapCircle& gap,
                                             const TargetCurve& target, const NodalField& u) {
    const auto b = radial_flux_trace(mesh, gap, u);
    std::vector<double> grad(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
    for (int q = 0; q < gap.size(); ++q) {
        const int e = gap.elem[static_cast<std::size_t>(q)];
        const Triangle& t = mesh.triangle(e);
        const ElementGeometry& g = mesh.element_geometry(e);
        const double factor =
            2.0 * gap.weight[static_cast<std::size_t>(q)] *
            (b[static_cast<std::size_t>(q)] - target(gap.theta[static_cast<std::size_t>(q)]));
        for (int k = 0; k < 3; ++k) {
            grad[static_cast<std::size_t>(t.v[k])] +=
                factor * g.grad_basis[static_cast<std::size_t>(k)].dot(
                             gap.tangent[static_cast<std::size_t>(q)]);
        }
    }
    return grad;
}

LoadVector objective_gradient(const Mesh& mesh, const GapCircle& gap, const TargetCurve& target,
                              const NodalField& u) {
    const auto nodal = objective_gradient_nodal(mesh, gap, target, u);
    LoadVector g;
    g.dofs = make_dof_map(mesh);
    g.values = Eigen::VectorXd::Zero(g.dofs.n_free());
    for (int k = 0; k < g.dofs.n_free(); ++k) {
        g.values[k] = nodal[static_cast<std::size_t>(g.dofs.free_to_node[static_cast<std::size_t>(k)])];
    }
    return g;
}

AdjointSolveReport solve_adjoint(const Mesh& mesh, const BHModel& model, const DesignState& state,
                                 const NodalField& u, const GapCircle& gap,
                                 const TargetCurve& target, double tol) {
    AdjointSolveReport report;
    report.mode = state.mode;

    const SparseOperator A = (state.mode == MaterialMode::Linear)
                                 ? assemble_stiffness(mesh, model, state)
                                 : assemble_newton_matrix(mesh, model, state, u);
    LoadVector rhs = objective_gradient(mesh, gap, target, u);
    rhs.values = -rhs.values;
    // K and N are symmetric, so the transposed system reuses A as assembled.
    report.p = solve_linear(A, rhs, tol);
    const double rhs_norm = rhs.values.norm();
    report.residual =
        rhs_norm == 0.0
            ? 0.0
            : (A.matrix * restrict_to_free(A.dofs, report.p) - rhs.values).norm() / rhs_norm;
    return report;
}

}  // namespace magopt
