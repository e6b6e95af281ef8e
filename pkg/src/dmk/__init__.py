"""Discrete L_p dual Minkowski machinery: convex bodies on spectral sphere
grids, dual quermassintegrals and curvature measures, a Monge-Ampere solver
for the L_p dual Minkowski problem, and an inequality audit harness."""

from .sphere import CircleGrid, ScalarField, SphereGrid3, build_grid, default_grid
from .body import (
    BodyError,
    ConvexBody,
    ParameterError,
    Polytope,
    ProblemParams,
    ball,
    body_from_radial,
    ellipsoid,
    lp_combination,
    lp_mean_support,
    radial_from_support,
    random_symmetric_body,
    read_body,
    support_from_radial,
    wulff_shape,
    write_body,
)
from .dual import (
    dual_curvature_density,
    dual_curvature_mass,
    dual_quermassintegral,
    variational_derivative,
    volume,
)
from .solver import (
    SolveReport,
    SolverConfig,
    SolverError,
    minimize_phi,
    residual,
    solve_lp_dual_minkowski,
)
from .harness import (
    AuditReport,
    InequalityReport,
    UniquenessReport,
    c0_audit,
    check_bm,
    check_minkowski,
    counterexample_search,
    equivalence_probe,
    jensen_containment,
    uniqueness_probe,
)
from .expr import Expression, ExpressionError, parse_expression

__version__ = "1.0.0"

__all__ = [
    "AuditReport", "BodyError", "CircleGrid", "ConvexBody", "Expression",
    "ExpressionError", "InequalityReport", "ParameterError", "Polytope",
    "ProblemParams", "ScalarField", "SolveReport", "SolverConfig",
    "SolverError", "SphereGrid3", "UniquenessReport", "ball",
    "body_from_radial", "build_grid", "c0_audit", "check_bm",
    "check_minkowski", "counterexample_search", "default_grid",
    "dual_curvature_density", "dual_curvature_mass", "dual_quermassintegral",
    "ellipsoid", "equivalence_probe", "jensen_containment", "lp_combination",
    "lp_mean_support", "minimize_phi", "parse_expression",
    "radial_from_support", "random_symmetric_body", "read_body", "residual",
    "solve_lp_dual_minkowski", "support_from_radial", "uniqueness_probe",
    "variational_derivative", "volume", "write_body", "wulff_shape",
]
