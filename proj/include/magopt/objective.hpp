#pragma once

#include <functional>
#include <vector>

#include "magopt/fem.hpp"

namespace magopt {

// Desired radial induction on the gap circle, theta -> B_rad^d(theta).
struct TargetCurve {
    std::function<double(double)> fn;

    double operator()(double theta) const { return fn(theta); }

    // amplitude * sin(frequency * theta); defaults reproduce 0.5*sin(4 theta).
    static TargetCurve sine(double amplitude = 0.5, double frequency = 4.0);
    static TargetCurve zero();
};

// Quadrature circle of radius R inside the air gap, angular span [0, pi/2],
// composite midpoint rule. Every point must fall inside an AIR element.
struct GapCircle {
    double radius = 0.0;
    double tangent_sign = 1.0;
    std::vector<double> theta;
    std::vector<double> weight;   // arc-length weights, sum = (pi/2) * radius
    std::vector<int> elem;        // containing element per point
    std::vector<Vec2> tangent;    // tangent_sign * (-sin, cos)

    int size() const { return static_cast<int>(theta.size()); }
};

GapCircle build_gap_circle(const Mesh& mesh, double radius, int n_q, double tangent_sign = 1.0);

// b_q = grad u|_{T(theta_q)} . tau(theta_q)  (radial induction samples).
std::vector<double> radial_flux_trace(const Mesh& mesh, const GapCircle& gap,
                                      const NodalField& u);

// J(u) = sum_q w_q (b_q - B_rad^d(theta_q))^2.
double objective(const Mesh& mesh, const GapCircle& gap, const TargetCurve& target,
                 const NodalField& u);

// dJ/du as a full nodal vector: entry i = sum_q 2 w_q (b_q - d_q)(grad phi_i . tau_q).
std::vector<double> objective_gradient_nodal(const Mesh& mesh, const GapCircle& gap,
                                             const TargetCurve& target, const NodalField& u);

// dJ/du restricted to free dofs.
LoadVector objective_gradient(const Mesh& mesh, const GapCircle& gap, const TargetCurve& target,
                              const NodalField& u);

struct AdjointSolveReport {
    NodalField p;
    double residual = 0.0;
    MaterialMode mode = MaterialMode::Linear;
};

// (K+N)^T p = -dJ/du at the converged state u; N vanishes in linear mode.
AdjointSolveReport solve_adjoint(const Mesh& mesh, const BHModel& model, const DesignState& state,
                                 const NodalField& u, const GapCircle& gap,
                                 const TargetCurve& target, double tol = 1e-10);

}  // namespace magopt
