"""Assembly of the ten optimality systems as block sparse matrices.

Unknown layout is fixed: (z, p, u) for the full three-field systems, (z, u)
for the reduced (adjoint-eliminated) two-field forms. Rows follow equation
order: state, adjoint, gradient (full) / state, reduced-adjoint (reduced).

Naming: od* are the discretized continuous optimality systems; do* come
from differentiating a discrete objective under the discrete state
constraint ("-trap"/"-simp" for the quadrature, "-reg" for the gradient-
penalized mass weights M - gamma*lap with gamma = 1 (second order) or
gamma = h^-2 (fourth order) by default).

Data handling: f and g may be passed as GridFunctions (interior values;
operator products are plain matrix products) or as callable fields. With
callables, products through the averaging weights R are applied as stencils
to full-grid samples, so the data's boundary values enter exactly as the
compact scheme requires; this distinction only matters when f or g do not
vanish on the boundary. Mass-weight products (Q g, (M - gamma*lap) g) are
interior products either way: they come from differentiating the discrete
objective, which never sees boundary samples.

The reduced form of do4-trap is, per its elimination identity, the same
matrix (and data convention) as reduced od4; its (z, u) agrees with the
full three-field solve exactly when f, g vanish on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    GridMismatchError,
    PreconditionError,
    SimpsonParityError,
    UnsupportedReductionError,
)
from .grid import Grid, GridFunction, sample, sample_full
from . import operators
from .objective import ObjectiveSpec

SCHEME_NAMES = (
    "od2",
    "od4",
    "do2-trap",
    "do2-simp",
    "do4-trap",
    "do4-simp",
    "do2-trap-reg",
    "do2-simp-reg",
    "do4-trap-reg",
    "do4-simp-reg",
)

# internal: do2-simp with the u-only penalty, used by the gamma sweep
UONLY_NAME = "do2-simp-uonly"

_REG_SCHEMES = {"do2-trap-reg", "do2-simp-reg", "do4-trap-reg", "do4-simp-reg"}
_FOURTH_ORDER = {"od4", "do4-trap", "do4-simp", "do4-trap-reg", "do4-simp-reg"}


@dataclass(frozen=True)
class SchemeSpec:
    """A named discretization plus its parameters.

    gamma_rule applies to the *-reg schemes (and the internal u-only
    variant): ("fixed", value) or ("inverse_h2",). Defaults follow the
    optimal choices: gamma = 1 for second-order, gamma = h^-2 for
    fourth-order regularized schemes.
    """

    name: str
    alpha: float
    gamma_rule: Optional[tuple] = None

    def __post_init__(self):
        if self.name not in SCHEME_NAMES and self.name != UONLY_NAME:
            raise PreconditionError(
                f"unknown scheme {self.name!r}; choose from {', '.join(SCHEME_NAMES)}"
            )
        if self.alpha <= 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if self.gamma_rule is not None:
            kind = self.gamma_rule[0]
            if kind not in ("fixed", "inverse_h2"):
                raise PreconditionError(f"unknown gamma rule {self.gamma_rule!r}")
            if kind == "fixed" and float(self.gamma_rule[1]) < 0:
                raise PreconditionError("fixed gamma must be nonnegative")

    @property
    def is_reg(self) -> bool:
        return self.name in _REG_SCHEMES or self.name == UONLY_NAME

    @property
    def order(self) -> int:
        return 4 if self.name in _FOURTH_ORDER else 2

    @property
    def uses_simpson(self) -> bool:
        return "simp" in self.name


def resolve_gamma(spec: SchemeSpec, grid: Grid) -> float:
    """Resolve the regularization weight for a grid (0 for unregularized)."""
    if not spec.is_reg:
        return 0.0
    rule = spec.gamma_rule
    if rule is None:
        rule = ("inverse_h2",) if spec.order == 4 else ("fixed", 1.0)
    if rule[0] == "fixed":
        return float(rule[1])
    return float(grid.n) ** 2


# --- block recipes --------------------------------------------------------
# Entry: (coefficient, kind). Kinds: lap, I, F, R, Q, MI = I - gamma*lap,
# MQ = Q - gamma*lap; "*"-joined kinds are matrix products (literal order).
# rhs entries: (data, kind) with data in {"f", "g"}, or None for a zero row.

def _full_recipe(name: str, alpha: float):
    a = alpha
    if name in ("od2", "do2-trap"):
        rows = [
            [(-1.0, "lap"), None, (-1.0, "I")],
            [(1.0, "I"), (-1.0, "lap"), None],
            [None, (-1.0, "I"), (a, "I")],
        ]
        rhs = [("f", "I"), ("g", "I"), None]
    elif name == "do2-simp":
        rows = [
            [(-1.0, "lap"), None, (-1.0, "I")],
            [(1.0, "Q"), (-1.0, "lap"), None],
            [None, (-1.0, "I"), (a, "Q")],
        ]
        rhs = [("f", "I"), ("g", "Q"), None]
    elif name == "do2-trap-reg":
        rows = [
            [(-1.0, "lap"), None, (-1.0, "I")],
            [(1.0, "MI"), (-1.0, "lap"), None],
            [None, (-1.0, "I"), (a, "MI")],
        ]
        rhs = [("f", "I"), ("g", "MI"), None]
    elif name == "do2-simp-reg":
        rows = [
            [(-1.0, "lap"), None, (-1.0, "I")],
            [(1.0, "MQ"), (-1.0, "lap"), None],
            [None, (-1.0, "I"), (a, "MQ")],
        ]
        rhs = [("f", "I"), ("g", "MQ"), None]
    elif name == UONLY_NAME:
        rows = [
            [(-1.0, "lap"), None, (-1.0, "I")],
            [(1.0, "Q"), (-1.0, "lap"), None],
            [None, (-1.0, "I"), (a, "MQ")],
        ]
        rhs = [("f", "I"), ("g", "Q"), None]
    elif name == "od4":
        rows = [
            [(1.0, "F"), None, (-1.0, "R")],
            [(1.0, "R"), (1.0, "F"), None],
            [None, (-1.0, "I"), (a, "I")],
        ]
        rhs = [("f", "R"), ("g", "R"), None]
    elif name == "do4-trap":
        rows = [
            [(1.0, "F"), None, (-1.0, "R")],
            [(1.0, "I"), (1.0, "F"), None],
            [None, (-1.0, "R"), (a, "I")],
        ]
        rhs = [("f", "R"), ("g", "I"), None]
    elif name == "do4-simp":
        rows = [
            [(1.0, "F"), None, (-1.0, "R")],
            [(1.0, "Q"), (1.0, "F"), None],
            [None, (-1.0, "R"), (a, "Q")],
        ]
        rhs = [("f", "R"), ("g", "Q"), None]
    elif name == "do4-trap-reg":
        rows = [
            [(1.0, "F"), None, (-1.0, "R")],
            [(1.0, "MI"), (1.0, "F"), None],
            [None, (-1.0, "R"), (a, "MI")],
        ]
        rhs = [("f", "R"), ("g", "MI"), None]
    elif name == "do4-simp-reg":
        rows = [
            [(1.0, "F"), None, (-1.0, "R")],
            [(1.0, "MQ"), (1.0, "F"), None],
            [None, (-1.0, "R"), (a, "MQ")],
        ]
        rhs = [("f", "R"), ("g", "MQ"), None]
    else:
        raise PreconditionError(f"unknown scheme {name!r}")
    return rows, rhs, ("z", "p", "u")


def _reduced_recipe(name: str, alpha: float):
    a = alpha
    if name in ("od2", "do2-trap"):
        rows = [
            [(-1.0, "lap"), (-1.0, "I")],
            [(1.0, "I"), (-a, "lap")],
        ]
        rhs = [("f", "I"), ("g", "I")]
    elif name in ("od4", "do4-trap"):
        # do4-trap reduces, via its elimination identity, to exactly this system
        rows = [
            [(1.0, "F"), (-1.0, "R")],
            [(1.0, "R"), (a, "F")],
        ]
        rhs = [("f", "R"), ("g", "R")]
    elif name == "do2-trap-reg":
        rows = [
            [(-1.0, "lap"), (-1.0, "I")],
            [(1.0, "MI"), (-a, "lap*MI")],
        ]
        rhs = [("f", "I"), ("g", "MI")]
    elif name == "do2-simp-reg":
        rows = [
            [(-1.0, "lap"), (-1.0, "I")],
            [(1.0, "MQ"), (-a, "lap*MQ")],
        ]
        rhs = [("f", "I"), ("g", "MQ")]
    elif name == "do4-trap-reg":
        rows = [
            [(1.0, "F"), (-1.0, "R")],
            [(1.0, "R*MI"), (a, "F*MI")],
        ]
        rhs = [("f", "R"), ("g", "R*MI")]
    elif name == "do4-simp-reg":
        # experimental: adjoint eliminated by a block step; p itself needs an R solve
        rows = [
            [(1.0, "F"), (-1.0, "R")],
            [(1.0, "R*MQ"), (a, "F*MQ")],
        ]
        rhs = [("f", "R"), ("g", "R*MQ")]
    else:
        raise UnsupportedReductionError(
            f"scheme {name!r} has no adjoint-eliminated two-field form"
        )
    return rows, rhs, ("z", "u")


@dataclass
class _OpCache:
    grid: Grid
    gamma: float
    _mats: dict = dc_field(default_factory=dict)

    def base(self, kind: str) -> sp.csr_matrix:
        if kind not in self._mats:
            if kind == "lap":
                m = operators.laplacian_5pt(self.grid).matrix
            elif kind == "I":
                m = operators.identity(self.grid).matrix
            elif kind == "F":
                m = operators.compact_f(self.grid).matrix
            elif kind == "R":
                m = operators.compact_r(self.grid).matrix
            elif kind == "Q":
                m = operators.simpson_q(self.grid).matrix
            elif kind == "MI":
                m = self.base("I") - self.gamma * self.base("lap")
            elif kind == "MQ":
                m = self.base("Q") - self.gamma * self.base("lap")
            else:
                raise PreconditionError(f"unknown operator kind {kind!r}")
            self._mats[kind] = sp.csr_matrix(m)
        return self._mats[kind]

    def mat(self, kind: str) -> sp.csr_matrix:
        parts = kind.split("*")
        m = self.base(parts[0])
        for part in parts[1:]:
            m = sp.csr_matrix(m @ self.base(part))
        return m


@dataclass
class KKTSystem:
    """An assembled block linear system with its recipe metadata."""

    grid: Grid
    spec: SchemeSpec
    gamma: float
    layout: tuple
    matrix: sp.csr_matrix
    rhs: np.ndarray
    blocks: list
    recipe_rows: list
    reduced: bool

    @property
    def n_fields(self) -> int:
        return len(self.layout)

    @property
    def has_simpson_block(self) -> bool:
        return any(
            "Q" in entry[1]
            for row in self.recipe_rows
            for entry in row
            if entry is not None
        )

    def split(self, x: np.ndarray) -> dict:
        parts = np.split(np.asarray(x), self.n_fields)
        return dict(zip(self.layout, parts))


def _data_vector(data, kind: str, grid: Grid, cache: _OpCache) -> np.ndarray:
    """Apply an operator kind to problem data.

    GridFunction data -> interior matrix product. Callable data -> for
    R-products, stencil application to full-grid samples (boundary values
    included); everything else samples the interior and multiplies.
    """
    if callable(data) and not isinstance(data, GridFunction):
        if kind == "R":
            return operators.stencil_apply_r(sample_full(data, grid), grid)
        if "*" in kind:
            parts = kind.split("*")
            if parts[0] == "R":
                inner = _data_vector(data, "*".join(parts[1:]), grid, cache)
                return cache.mat("R") @ inner
        vec = sample(data, grid).values
    else:
        vec = data.values if isinstance(data, GridFunction) else np.asarray(data, float)
        if vec.shape != (grid.interior_count,):
            raise GridMismatchError("data vector does not match the grid")
    if kind == "I":
        return vec.copy()
    return cache.mat(kind) @ vec


def _assemble(spec: SchemeSpec, grid: Grid, f, g, reduced: bool) -> KKTSystem:
    if spec.uses_simpson and grid.n % 2 != 0:
        raise SimpsonParityError(
            f"{spec.name} uses composite Simpson weights; n must be even, got n={grid.n}"
        )
    gamma = resolve_gamma(spec, grid)
    recipe = _reduced_recipe if reduced else _full_recipe
    rows, rhs_spec, layout = recipe(spec.name, spec.alpha)
    cache = _OpCache(grid, gamma)
    nblk = len(layout)
    blocks = [[None] * nblk for _ in range(nblk)]
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            if entry is not None:
                coeff, kind = entry
                blocks[i][j] = coeff * cache.mat(kind)
    data = {"f": f, "g": g}
    rhs_parts = []
    for entry in rhs_spec:
        if entry is None:
            rhs_parts.append(np.zeros(grid.interior_count))
        else:
            field_name, kind = entry
            rhs_parts.append(_data_vector(data[field_name], kind, grid, cache))
    matrix = sp.csr_matrix(sp.bmat(blocks, format="csr"))
    return KKTSystem(
        grid=grid,
        spec=spec,
        gamma=gamma,
        layout=layout,
        matrix=matrix,
        rhs=np.concatenate(rhs_parts),
        blocks=blocks,
        recipe_rows=rows,
        reduced=reduced,
    )


def assemble(spec: SchemeSpec, grid: Grid, f, g) -> KKTSystem:
    """Assemble the full three-field system for a scheme on a grid."""
    return _assemble(spec, grid, f, g, reduced=False)


def assemble_reduced(spec: SchemeSpec, grid: Grid, f, g) -> KKTSystem:
    """Assemble the two-field (adjoint-eliminated) form where defined."""
    return _assemble(spec, grid, f, g, reduced=True)


def supports_reduction(name: str) -> bool:
    return name in (
        "od2",
        "od4",
        "do2-trap",
        "do4-trap",
        "do2-trap-reg",
        "do2-simp-reg",
        "do4-trap-reg",
        "do4-simp-reg",
    )


def residual(system: KKTSystem, **fields) -> np.ndarray:
    """A x - b for field values given by layout name (z=, p=, u=)."""
    missing = [name for name in system.layout if name not in fields]
    if missing:
        raise GridMismatchError(f"missing fields for layout {system.layout}: {missing}")
    parts = []
    for name in system.layout:
        v = fields[name]
        v = v.values if isinstance(v, GridFunction) else np.asarray(v, float)
        if v.shape != (system.grid.interior_count,):
            raise GridMismatchError(f"field {name} does not match the grid")
        parts.append(v)
    x = np.concatenate(parts)
    return system.matrix @ x - system.rhs


def recover_adjoint(spec: SchemeSpec, grid: Grid, u) -> GridFunction:
    """Recover p from the scheme's gradient row: P p = alpha * U u."""
    gamma = resolve_gamma(spec, grid)
    rows, _, _ = _full_recipe(spec.name, spec.alpha)
    grad_row = rows[2]
    coeff_p, kind_p = grad_row[1]
    coeff_u, kind_u = grad_row[2]
    cache = _OpCache(grid, gamma)
    uv = u.values if isinstance(u, GridFunction) else np.asarray(u, float)
    rhs = -(coeff_u / coeff_p) * (cache.mat(kind_u) @ uv)
    if kind_p == "I":
        pv = rhs
    else:
        pv = spla.spsolve(sp.csc_matrix(cache.mat(kind_p)), rhs)
    return GridFunction(grid, pv)


def objective_spec_for(spec: SchemeSpec, grid: Grid) -> tuple:
    """ObjectiveSpec and state operator pair matching a DO scheme.

    The returned pieces make eval_lagrangian's gradient coincide with the
    assembled residual rows. od4 is not the gradient of any discrete
    objective (its adjoint row carries R z against a plain -I gradient
    row), so it is rejected; od2 coincides with do2-trap.
    """
    if spec.name == "od4":
        raise PreconditionError(
            "od4 is not the optimality system of a discrete objective"
        )
    gamma = resolve_gamma(spec, grid)
    quad = "simpson" if spec.uses_simpson else "trapezoidal"
    if spec.name == UONLY_NAME:
        reg = "uonly"
    elif spec.is_reg:
        reg = "full"
    else:
        reg = "none"
    ospec = ObjectiveSpec(quad, spec.alpha, reg, gamma)
    if spec.order == 4:
        state_ops = (operators.compact_f(grid), _negated(operators.compact_r(grid)))
    else:
        state_ops = (
            _negated(operators.laplacian_5pt(grid)),
            _negated(operators.identity(grid)),
        )
    return ospec, state_ops


def _negated(op: operators.DiscreteOperator) -> operators.DiscreteOperator:
    return operators.DiscreteOperator(op.grid, f"-{op.kind}", sp.csr_matrix(-op.matrix))


def filter_matrix_deviation(grid: Grid, alpha: float, gamma: float = 1.0) -> float:
    """Numerical size of ||S - I|| for the Simpson-reg reduced comparison.

    S = lap^{-1} (Q-gamma*lap)^{-1} lap (Q-gamma*lap); dense evaluation on
    small grids, no accuracy claim attached.
    """
    cache = _OpCache(grid, gamma)
    lap = cache.mat("lap").toarray()
    M = cache.mat("MQ").toarray()
    S = np.linalg.solve(lap, np.linalg.solve(M, lap @ M))
    return float(np.linalg.norm(S - np.eye(S.shape[0]), 2))
