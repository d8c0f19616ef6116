"""2D magnetostatics topology optimization.

Finite element solves of the vector-potential equation (linear and nonlinear
reluctivity), adjoint-based ON/OFF sensitivities, topological derivatives
via boundary-integral polarization matrices, and the iterative hole-carving
optimization loop on a parametric quarter-motor benchmark.
"""

from magopt._core import (  # noqa: F401
    NU0_AIR,
    AdjointSolveReport,
    BHModel,
    DesignState,
    GapCircle,
    InclusionShape,
    IterationRecord,
    MaterialMode,
    Mesh,
    MotorGeometry,
    NodalField,
    OptimizationHistory,
    OptimizerConfig,
    Region,
    SensitivityField,
    SolveOptions,
    SolverError,
    StateSolveReport,
    TargetCurve,
    ValidationError,
    Vec2,
    build_gap_circle,
    disk_polarization_matrix,
    generate_motor_mesh,
    generate_rectangle_mesh,
    load_mesh,
    objective,
    objective_gradient,
    onoff_sensitivities,
    panelize,
    polarization_matrix,
    radial_flux_trace,
    run_onoff,
    sensitivity_fd_oracle,
    solve_adjoint,
    solve_state,
    solve_state_report,
    topological_derivative_field,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
