#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "magopt/materials.hpp"
#include "magopt/mesh.hpp"

namespace magopt {

// Map between mesh nodes and free (non-Dirichlet) degrees of freedom.
struct DofMap {
    std::vector<int> node_to_free;  // -1 on Dirichlet nodes
    std::vector<int> free_to_node;

    int n_free() const { return static_cast<int>(free_to_node.size()); }
    int n_nodes() const { return static_cast<int>(node_to_free.size()); }
};

DofMap make_dof_map(const Mesh& mesh);

// P1 coefficient vector, one value per mesh node. Dirichlet nodes carry 0
// for primal and adjoint solutions.
struct NodalField {
    std::vector<double> values;

    static NodalField zeros(const Mesh& mesh);
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

struct SparseOperator {
    Eigen::SparseMatrix<double> matrix;  // n_free x n_free, symmetric
    DofMap dofs;
};

struct LoadVector {
    Eigen::VectorXd values;  // n_free
    DofMap dofs;
};

// Magnetization right-hand side: F_i = sum over magnet triangles of
// area * (Mperp . grad phi_i), Mperp = (-My, Mx). The current term is zero.
LoadVector assemble_rhs(const Mesh& mesh);

// Load from a scalar density f: F_i = int f phi_i, edge-midpoint quadrature.
LoadVector assemble_load(const Mesh& mesh, const std::function<double(Vec2)>& f);

// Stiffness K(u): element contributions nu(T,|grad u|_T) * area * grad phi_i . grad phi_j,
// Dirichlet rows and columns eliminated. u may be null in linear mode (s = 0).
SparseOperator assemble_stiffness(const Mesh& mesh, const BHModel& model,
                                  const DesignState& state, const NodalField* u = nullptr);

// Newton matrix K(u) + N(u) with the rank-one element term
// (nu_hat'(s)/s) * area * (grad u . grad phi_i)(grad u . grad phi_j), s = |grad u|_T.
SparseOperator assemble_newton_matrix(const Mesh& mesh, const BHModel& model,
                                      const DesignState& state, const NodalField& u);

// Direct SPD solve with iterative refinement; relative residual <= tol or throws.
NodalField solve_linear(const SparseOperator& K, const LoadVector& F, double tol = 1e-10);

struct SolveOptions {
    double linear_tol = 1e-10;
    double newton_tol = 1e-8;
    int max_newton_iters = 50;
    int max_backtracks = 30;
    double backtrack_factor = 0.5;
    const NodalField* initial_guess = nullptr;  // warm start, optional
};

struct StateSolveReport {
    NodalField u;
    int newton_iterations = 0;
    std::vector<double> residual_history;  // ||r||/||F|| per accepted iterate
    bool converged = true;
};

// Solve K(u)u = F: one linear solve in linear mode, damped Newton with
// Armijo backtracking in nonlinear mode.
StateSolveReport solve_state_report(const Mesh& mesh, const BHModel& model,
                                    const DesignState& state, const SolveOptions& opts = {});
NodalField solve_state(const Mesh& mesh, const BHModel& model, const DesignState& state,
                       const SolveOptions& opts = {});

// Residual K(u)u - F on free dofs.
Eigen::VectorXd state_residual(const Mesh& mesh, const BHModel& model, const DesignState& state,
                               const NodalField& u, const LoadVector& F);

// Restriction / prolongation between nodal fields and free-dof vectors.
Eigen::VectorXd restrict_to_free(const DofMap& dofs, const NodalField& field);
NodalField scatter_to_nodes(const DofMap& dofs, const Eigen::VectorXd& x);

// L2 norm of (field - exact) with the degree-2 edge-midpoint rule.
double l2_error(const Mesh& mesh, const NodalField& field,
                const std::function<double(Vec2)>& exact);

}  // namespace magopt
