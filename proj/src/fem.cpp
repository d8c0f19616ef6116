#include "magopt/fem.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <sstream>

#include "magopt/errors.hpp"

namespace magopt {

DofMap make_dof_map(const Mesh& mesh) {
    DofMap map;
    map.node_to_free.assign(static_cast<std::size_t>(mesh.num_nodes()), -1);
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        if (!mesh.is_dirichlet_node(i)) {
            map.node_to_free[static_cast<std::size_t>(i)] =
                static_cast<int>(map.free_to_node.size());
            map.free_to_node.push_back(i);
        }
    }
    return map;
}

NodalField NodalField::zeros(const Mesh& mesh) {
    NodalField f;
    f.values.assign(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
    return f;
}

Eigen::VectorXd restrict_to_free(const DofMap& dofs, const NodalField& field) {
    Eigen::VectorXd x(dofs.n_free());
    for (int k = 0; k < dofs.n_free(); ++k) {
        x[k] = field.values[static_cast<std::size_t>(dofs.free_to_node[static_cast<std::size_t>(k)])];
    }
    return x;
}

NodalField scatter_to_nodes(const DofMap& dofs, const Eigen::VectorXd& x) {
    NodalField f;
    f.values.assign(static_cast<std::size_t>(dofs.n_nodes()), 0.0);
    for (int k = 0; k < dofs.n_free(); ++k) {
        f.values[static_cast<std::size_t>(dofs.free_to_node[static_cast<std::size_t>(k)])] = x[k];
    }
    return f;
}

LoadVector assemble_rhs(const Mesh& mesh) {
    LoadVector F;
    F.dofs = make_dof_map(mesh);
    F.values = Eigen::VectorXd::Zero(F.dofs.n_free());
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Triangle& t = mesh.triangle(e);
        if (t.region != Region::Magnet) continue;
        const Vec2& M = mesh.magnetization_of(t.magnet_id);
        const Vec2 m_perp{-M.y, M.x};
        const ElementGeometry& g = mesh.element_geometry(e);
        for (int k = 0; k < 3; ++k) {
            const int dof = F.dofs.node_to_free[static_cast<std::size_t>(t.v[k])];
            if (dof >= 0) {
                F.values[dof] += g.area * m_perp.dot(g.grad_basis[static_cast<std::size_t>(k)]);
            }
        }
    }
    return F;
}

LoadVector assemble_load(const Mesh& mesh, const std::function<double(Vec2)>& f) {
    LoadVector F;
    F.dofs = make_dof_map(mesh);
    F.values = Eigen::VectorXd::Zero(F.dofs.n_free());
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Triangle& t = mesh.triangle(e);
        const ElementGeometry& g = mesh.element_geometry(e);
        // Edge-midpoint rule, exact for quadratics: phi_k is 1/2 on the two
        // midpoints adjacent to vertex k and 0 on the opposite one.
        std::array<double, 3> fm{};
        for (int m = 0; m < 3; ++m) {
            const Vec2 mid = (mesh.node(t.v[(m + 1) % 3]) + mesh.node(t.v[(m + 2) % 3])) / 2.0;
            fm[static_cast<std::size_t>(m)] = f(mid);
        }
        for (int k = 0; k < 3; ++k) {
            const int dof = F.dofs.node_to_free[static_cast<std::size_t>(t.v[k])];
            if (dof < 0) continue;
            double val = 0.0;
            for (int m = 0; m < 3; ++m) {
                if (m != k) val += 0.5 * fm[static_cast<std::size_t>(m)];
            }
            F.values[dof] += g.area / 3.0 * val;
        }
    }
    return F;
}

namespace {

double element_s(const Mesh& mesh, const NodalField* u, int e) {
    if (u == nullptr) return 0.0;
    return mesh.element_gradient(u->values, e).norm();
}

SparseOperator assemble_system(const Mesh& mesh, const BHModel& model, const DesignState& state,
                               const NodalField* u, bool with_newton_term) {
    SparseOperator K;
    K.dofs = make_dof_map(mesh);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Triangle& t = mesh.triangle(e);
        const ElementGeometry& g = mesh.element_geometry(e);
        const double s = element_s(mesh, u, e);
        const double nu = reluctivity(model, state, mesh, e, s);

        double newton_coeff = 0.0;
        Vec2 grad_u;
        if (with_newton_term && element_is_field_dependent(state, mesh, e)) {
            grad_u = mesh.element_gradient(u->values, e);
            newton_coeff = model.nu_hat_prime_over_s(s);
        }

        for (int a = 0; a < 3; ++a) {
            const int i = K.dofs.node_to_free[static_cast<std::size_t>(t.v[a])];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int j = K.dofs.node_to_free[static_cast<std::size_t>(t.v[b])];
                if (j < 0) continue;
                double val = nu * g.area *
                             g.grad_basis[static_cast<std::size_t>(a)].dot(
                                 g.grad_basis[static_cast<std::size_t>(b)]);
                if (newton_coeff != 0.0) {
                    val += newton_coeff * g.area *
                           grad_u.dot(g.grad_basis[static_cast<std::size_t>(a)]) *
                           grad_u.dot(g.grad_basis[static_cast<std::size_t>(b)]);
                }
                triplets.emplace_back(i, j, val);
            }
        }
    }
    K.matrix.resize(K.dofs.n_free(), K.dofs.n_free());
    K.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return K;
}

}  // namespace

SparseOperator assemble_stiffness(const Mesh& mesh, const BHModel& model,
                                  const DesignState& state, const NodalField* u) {
    return assemble_system(mesh, model, state, u, false);
}

SparseOperator assemble_newton_matrix(const Mesh& mesh, const BHModel& model,
                                      const DesignState& state, const NodalField& u) {
    return assemble_system(mesh, model, state, &u, true);
}

NodalField solve_linear(const SparseOperator& K, const LoadVector& F, double tol) {
    if (K.matrix.rows() != F.values.size()) {
        throw ValidationError("solve_linear: operator and load sizes differ");
    }
    const double fnorm = F.values.norm();
    if (fnorm == 0.0) {
        return scatter_to_nodes(K.dofs, Eigen::VectorXd::Zero(F.values.size()));
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(K.matrix);
    if (solver.info() != Eigen::Success) {
        throw SolverError("solve_linear: LDLT factorization failed (matrix not SPD?)");
    }
    Eigen::VectorXd x = solver.solve(F.values);
    double rel = (K.matrix * x - F.values).norm() / fnorm;
    // A few refinement sweeps mop up roundoff on badly scaled systems.
    for (int sweep = 0; sweep < 3 && rel > tol; ++sweep) {
        const Eigen::VectorXd r = F.values - K.matrix * x;
        x += solver.solve(r);
        rel = (K.matrix * x - F.values).norm() / fnorm;
    }
    if (!(rel <= tol)) {
        std::ostringstream msg;
        msg << "solve_linear: residual " << rel << " above tolerance " << tol;
        throw SolverError(msg.str());
    }
    return scatter_to_nodes(K.dofs, x);
}

Eigen::VectorXd state_residual(const Mesh& mesh, const BHModel& model, const DesignState& state,
                               const NodalField& u, const LoadVector& F) {
    const SparseOperator K = assemble_stiffness(mesh, model, state, &u);
    return K.matrix * restrict_to_free(K.dofs, u) - F.values;
}

StateSolveReport solve_state_report(const Mesh& mesh, const BHModel& model,
                                    const DesignState& state, const SolveOptions& opts) {
    StateSolveReport report;
    const LoadVector F = assemble_rhs(mesh);

    if (state.mode == MaterialMode::Linear) {
        const SparseOperator K = assemble_stiffness(mesh, model, state);
        report.u = solve_linear(K, F, opts.linear_tol);
        report.newton_iterations = 0;
        report.residual_history.push_back(
            F.values.norm() == 0.0
                ? 0.0
                : (K.matrix * restrict_to_free(K.dofs, report.u) - F.values).norm() /
                      F.values.norm());
        return report;
    }

    const double fnorm = F.values.norm();
    if (opts.initial_guess != nullptr &&
        opts.initial_guess->values.size() != static_cast<std::size_t>(mesh.num_nodes())) {
        throw ValidationError("solve_state: initial guess does not match the mesh");
    }
    NodalField u = (opts.initial_guess != nullptr) ? *opts.initial_guess
                                                   : NodalField::zeros(mesh);
    if (fnorm == 0.0) {
        report.u = NodalField::zeros(mesh);
        report.residual_history.push_back(0.0);
        return report;
    }

    Eigen::VectorXd r = state_residual(mesh, model, state, u, F);
    double rnorm = r.norm() / fnorm;
    report.residual_history.push_back(rnorm);

    for (int it = 0; it < opts.max_newton_iters && rnorm > opts.newton_tol; ++it) {
        const SparseOperator J = assemble_newton_matrix(mesh, model, state, u);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(J.matrix);
        if (solver.info() != Eigen::Success) {
            throw SolverError("solve_state: Newton matrix factorization failed");
        }
        const Eigen::VectorXd du = solver.solve(-r);

        // Armijo backtracking on ||r||.
        double alpha = 1.0;
        bool accepted = false;
        const Eigen::VectorXd u_free = restrict_to_free(J.dofs, u);
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            NodalField trial = scatter_to_nodes(J.dofs, u_free + alpha * du);
            const Eigen::VectorXd r_trial = state_residual(mesh, model, state, trial, F);
            const double rnorm_trial = r_trial.norm() / fnorm;
            if (rnorm_trial <= (1.0 - 1e-4 * alpha) * rnorm) {
                u = std::move(trial);
                r = r_trial;
                rnorm = rnorm_trial;
                accepted = true;
                break;
            }
            alpha *= opts.backtrack_factor;
        }
        report.newton_iterations = it + 1;
        report.residual_history.push_back(rnorm);
        if (!accepted) {
            std::ostringstream msg;
            msg << "solve_state: Newton stagnated at iteration " << it + 1 << ", residual "
                << rnorm << "; trace:";
            for (double v : report.residual_history) msg << ' ' << v;
            throw SolverError(msg.str());
        }
    }

    if (rnorm > opts.newton_tol) {
        std::ostringstream msg;
        msg << "solve_state: Newton did not reach tolerance " << opts.newton_tol << " within "
            << opts.max_newton_iters << " iterations (residual " << rnorm << ")";
        throw SolverError(msg.str());
    }
    report.u = std::move(u);
    report.converged = true;
    return report;
}

NodalField solve_state(const Mesh& mesh, const BHModel& model, const DesignState& state,
                       const SolveOptions& opts) {
    return solve_state_report(mesh, model, state, opts).u;
}

double l2_error(const Mesh& mesh, const NodalField& field,
                const std::function<double(Vec2)>& exact) {
    double acc = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Triangle& t = mesh.triangle(e);
        const ElementGeometry& g = mesh.element_geometry(e);
        for (int m = 0; m < 3; ++m) {
            const int a = t.v[(m + 1) % 3];
            const int b = t.v[(m + 2) % 3];
            const Vec2 mid = (mesh.node(a) + mesh.node(b)) / 2.0;
            const double uh = 0.5 * (field.values[static_cast<std::size_t>(a)] +
                                     field.values[static_cast<std::size_t>(b)]);
            const double diff = uh - exact(mid);
            acc += g.area / 3.0 * diff * diff;
        }
    }
    return std::sqrt(acc);
}

}  // namespace magopt
