"""Amoebas, coamoebas and contours of complex plane curves and parametrized space curves."""
from .algebra import (
    LaurentPolynomial,
    NewtonPolytope,
    RationalCurve,
    eval_poly,
    gauss_degree,
    newton_polytope,
    partial_derivative,
    restrict_to_fiber,
    univariate_roots,
)
from .boundary import (
    HullVerdict,
    Verdict,
    branch_normal,
    classify_point,
    locate_pinch,
    origin_in_hull,
)
from .errors import AmoebaError, NumericFailure, ValidationError
from .fibers import (
    FiberDimension,
    Regularity,
    contour_cloud,
    curve_contour,
    fiber_scan,
    is_regular_value,
)
from .logmaps import arg_map, is_log_critical, log_gauss, log_map
from .parsing import parse_curve, parse_polynomial
from .regions import (
    arg_critical_values,
    basis_gap_report,
    coamoeba_cloud,
    convexity_audit,
    pushforward_curve,
    rasterize_amoeba_2d,
)
from .render import render_grid
from .scenarios import ScenarioConfig, run_scenario
from .voxels import VoxelGrid

__version__ = "0.1.0"

__all__ = [
    "AmoebaError",
    "FiberDimension",
    "HullVerdict",
    "LaurentPolynomial",
    "NewtonPolytope",
    "NumericFailure",
    "RationalCurve",
    "Regularity",
    "ScenarioConfig",
    "ValidationError",
    "Verdict",
    "VoxelGrid",
    "arg_critical_values",
    "arg_map",
    "basis_gap_report",
    "branch_normal",
    "classify_point",
    "coamoeba_cloud",
    "contour_cloud",
    "convexity_audit",
    "curve_contour",
    "eval_poly",
    "fiber_scan",
    "gauss_degree",
    "is_log_critical",
    "is_regular_value",
    "locate_pinch",
    "log_gauss",
    "log_map",
    "newton_polytope",
    "origin_in_hull",
    "parse_curve",
    "parse_polynomial",
    "partial_derivative",
    "pushforward_curve",
    "rasterize_amoeba_2d",
    "render_grid",
    "restrict_to_fiber",
    "run_scenario",
    "univariate_roots",
]
