"""Discrete quadratic objectives and the constrained Lagrangian.

The discretize-then-optimize objectives drop the h^dim quadrature scaling
(the assembled optimality systems then match their block displays exactly):

    J(z, u) = 1/2 (z-g)^T M_z (z-g) + alpha/2 u^T M_u u

with mass weights per quadrature/regularization choice:

    trapezoidal          M_z = M_u = I
    simpson              M_z = M_u = Q
    full reg             M_z = M_u = M - gamma*lap
    u-only reg           M_z = M  (base), M_u = M - gamma*lap

The u-only variant keeps the control penalty inside the alpha grouping
(third optimality row alpha*(Q - gamma*lap)u - p = 0); it exists to
reproduce the failure mode of penalizing the control alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, PreconditionError
from .grid import Grid, GridFunction
from . import operators

QUADRATURES = ("trapezoidal", "simpson")
REGULARIZATIONS = ("none", "uonly", "full")


@dataclass(frozen=True)
class ObjectiveSpec:
    quadrature: str
    alpha: float
    regularization: str = "none"
    gamma: float = 0.0

    def __post_init__(self):
        if self.quadrature not in QUADRATURES:
            raise PreconditionError(f"unknown quadrature {self.quadrature!r}")
        if self.regularization not in REGULARIZATIONS:
            raise PreconditionError(f"unknown regularization {self.regularization!r}")
        if self.alpha <= 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if self.gamma < 0:
            raise PreconditionError(f"gamma must be nonnegative, got {self.gamma}")


def mass_operators(spec: ObjectiveSpec, grid: Grid):
    """(M_z, M_u) sparse mass weights for the objective on a grid."""
    if spec.quadrature == "simpson":
        base = operators.simpson_q(grid).matrix
        base_name = "simpson_q"
    else:
        base = operators.identity(grid).matrix
        base_name = "identity"
    if spec.regularization == "none":
        return base, base
    reg = operators.reg_mass(base_name, spec.gamma, grid).matrix
    if spec.regularization == "full":
        return reg, reg
    return base, reg  # uonly: state term unregularized


def _as_values(grid: Grid, v):
    if isinstance(v, GridFunction):
        if v.grid != grid:
            raise GridMismatchError("objective operands live on different grids")
        return v.values
    return np.asarray(v, dtype=float)


def eval_objective(spec: ObjectiveSpec, z, u, g, grid: Grid = None) -> float:
    """Evaluate J at (z, u) for target g (unscaled quadrature convention)."""
    if grid is None:
        grid = z.grid
    zv, uv, gv = (_as_values(grid, w) for w in (z, u, g))
    Mz, Mu = mass_operators(spec, grid)
    d = zv - gv
    return float(0.5 * d @ (Mz @ d) + 0.5 * spec.alpha * uv @ (Mu @ uv))


def eval_lagrangian(spec: ObjectiveSpec, state_ops, z, u, p, f, g, grid: Grid = None) -> float:
    """J plus the multiplier term p^T (state residual).

    state_ops is the (S_z, S_u) operator pair of the discrete state
    equation written as S_z z + S_u u = -S_u f, i.e. (-lap, -I) for the
    five-point scheme and (F, -R) for the compact scheme; the data then
    enters as S_u f on the residual side in both cases.
    """
    if grid is None:
        grid = z.grid
    zv, uv, pv, fv, gv = (_as_values(grid, w) for w in (z, u, p, f, g))
    Sz, Su = (op.matrix if isinstance(op, operators.DiscreteOperator) else op for op in state_ops)
    residual = Sz @ zv + Su @ uv + Su @ fv
    return eval_objective(spec, zv, uv, gv, grid) + float(pv @ residual)


def hessian_blocks(spec: ObjectiveSpec, grid: Grid):
    """The (z, u) Hessian blocks of J: diag(M_z, alpha*M_u)."""
    Mz, Mu = mass_operators(spec, grid)
    return Mz, spec.alpha * Mu
