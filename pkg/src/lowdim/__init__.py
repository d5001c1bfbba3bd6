"""Finite element analysis of diffusion on low-dimensional structures in R^3."""
from .assembly import CoefficientMatrix, FemSystem, build_system, integrate, l2_error, relax_matrix
from .discretize import DofMap, Field, MeshSet, build_dof_map, kernel_groups, mesh, sample
from .elliptic import CompatibilityError, EllipticProblem, check_compatibility, poincare_constant, solve_elliptic
from .expressions import ExpressionError, parse_expression
from .parabolic import ParabolicProblem, asymptotic_check, energy, solve_parabolic
from .semigroup import TaylorDivergence, semigroup_apply, spectral_decompose, taylor_iterate
from .structure import (
    Component,
    Disc,
    Interval,
    Polygon,
    Structure,
    Theta,
    builtin,
    detect_junctions,
    load_structure,
    parse_structure,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientMatrix", "FemSystem", "build_system", "integrate", "l2_error", "relax_matrix",
    "DofMap", "Field", "MeshSet", "build_dof_map", "kernel_groups", "mesh", "sample",
    "CompatibilityError", "EllipticProblem", "check_compatibility", "poincare_constant", "solve_elliptic",
    "ExpressionError", "parse_expression",
    "ParabolicProblem", "asymptotic_check", "energy", "solve_parabolic",
    "TaylorDivergence", "semigroup_apply", "spectral_decompose", "taylor_iterate",
    "Component", "Disc", "Interval", "Polygon", "Structure", "Theta",
    "builtin", "detect_junctions", "load_structure", "parse_structure", "validate",
]
