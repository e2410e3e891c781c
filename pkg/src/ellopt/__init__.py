"""Finite-difference discretizations and convergence studies for the
linear-quadratic elliptic optimal control problem on the unit square."""

from .grid import Grid, GridFunction, inner_product, norm_inf, norm_l2, sample
from .objective import ObjectiveSpec, eval_lagrangian, eval_objective
from .problems import ManufacturedProblem, exact_on_grid, make
from .schemes import (
    SCHEME_NAMES,
    KKTSystem,
    SchemeSpec,
    assemble,
    assemble_reduced,
    recover_adjoint,
    residual,
)
from .linsolve import SolveConfig, SolveStats, fast_diag_apply_inverse, solve
from .study import (
    ConvergenceReport,
    equivalence_audit,
    gamma_sweep,
    oscillation_index,
    run_convergence,
    stability_audit,
    truncation_audit,
)

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "GridFunction",
    "inner_product",
    "norm_l2",
    "norm_inf",
    "sample",
    "ObjectiveSpec",
    "eval_objective",
    "eval_lagrangian",
    "ManufacturedProblem",
    "make",
    "exact_on_grid",
    "SchemeSpec",
    "KKTSystem",
    "SCHEME_NAMES",
    "assemble",
    "assemble_reduced",
    "residual",
    "recover_adjoint",
    "SolveConfig",
    "SolveStats",
    "solve",
    "fast_diag_apply_inverse",
    "ConvergenceReport",
    "run_convergence",
    "oscillation_index",
    "gamma_sweep",
    "equivalence_audit",
    "stability_audit",
    "truncation_audit",
    "__version__",
]
