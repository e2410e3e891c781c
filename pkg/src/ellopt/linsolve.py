"""Linear solvers for the assembled block systems.

Three methods:

* direct — sparse LU (fill-reducing ordering) on the whole block matrix;
  the default, mirroring a backslash-style solve.
* fastdiag — simultaneous diagonalization in the discrete sine basis. All
  blocks of the quadrature-free systems (trapezoidal/OD schemes and their
  reg variants) are polynomials in the per-axis second-difference
  eigenvalues, so the block system decouples into a tiny k x k solve per
  frequency pair. Rejected when a Simpson weight block is present.
* krylov — restarted GMRES preconditioned by the fastdiag inverse of the
  same scheme with its Simpson weights replaced by identity weights.

Every solve recomputes ||Ax - b||/||b|| and enforces the configured
residual contract; identical inputs give bitwise-identical outputs for
direct and fastdiag.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import PreconditionError, SolverError, UnsupportedMethodError
from .grid import Grid, GridFunction
from .schemes import KKTSystem

METHODS = ("direct", "krylov", "fastdiag")


@dataclass(frozen=True)
class SolveConfig:
    method: str = "direct"
    rel_residual_tol: float = 1e-10
    max_iterations: int = 2000

    def __post_init__(self):
        if self.method not in METHODS:
            raise PreconditionError(f"unknown solve method {self.method!r}")
        if not (0.0 < self.rel_residual_tol <= 1e-4):
            raise PreconditionError(
                f"rel_residual_tol must lie in (0, 1e-4], got {self.rel_residual_tol}"
            )
        if self.max_iterations < 1:
            raise PreconditionError("max_iterations must be positive")


@dataclass
class SolveStats:
    method: str
    iterations: int
    final_relative_residual: float
    elapsed_ms: float


def _rel_residual(matrix, x, b) -> float:
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return 0.0
    return float(np.linalg.norm(matrix @ x - b) / nb)


# --- sine-basis symbols -----------------------------------------------------

def axis_eigenvalues(grid: Grid) -> np.ndarray:
    """Per-axis eigenvalues of the second-difference matrix (sine basis)."""
    k = np.arange(1, grid.n)
    return -(4.0 / grid.h**2) * np.sin(k * np.pi * grid.h / 2.0) ** 2


def _base_symbol(kind: str, grid: Grid, gamma: float):
    lam = axis_eigenvalues(grid)
    if grid.dim == 2:
        ls = lam[:, None] + lam[None, :]
        lp = lam[:, None] * lam[None, :]
    else:
        ls = lam
        lp = None
    if kind == "lap":
        return ls
    if kind == "I":
        return np.ones_like(ls)
    if kind == "R":
        return 1.0 + (grid.h**2 / 12.0) * ls
    if kind == "F":
        if grid.dim == 1:
            return -ls
        return -ls - (grid.h**2 / 6.0) * lp
    if kind == "MI":
        return 1.0 - gamma * ls
    return None  # Q-weighted kinds have no sine-basis symbol


def operator_symbol(kind: str, grid: Grid, gamma: float = 0.0):
    """Sine-basis eigenvalue array for an operator kind ("lap*MI" allowed)."""
    sym = None
    for part in kind.split("*"):
        s = _base_symbol(part, grid, gamma)
        if s is None:
            return None
        sym = s if sym is None else sym * s
    return sym


def _system_symbol(system: KKTSystem):
    """Stacked block symbol tensor, or None when a Simpson block is present."""
    k = system.n_fields
    grid = system.grid
    fshape = (grid.m, grid.m) if grid.dim == 2 else (grid.m,)
    sym = np.zeros((k, k) + fshape)
    for i, row in enumerate(system.recipe_rows):
        for j, entry in enumerate(row):
            if entry is None:
                continue
            coeff, kind = entry
            s = operator_symbol(kind, grid, system.gamma)
            if s is None:
                return None
            sym[i, j] = coeff * s
    return sym


def _dst_field(values: np.ndarray, grid: Grid, inverse: bool = False) -> np.ndarray:
    """DST-I of one interior field, kept in field shape."""
    if grid.dim == 1:
        fn = scipy.fft.idst if inverse else scipy.fft.dst
        return fn(values, type=1)
    arr = values.reshape((grid.m, grid.m), order="F")
    fn = scipy.fft.idstn if inverse else scipy.fft.dstn
    return fn(arr, type=1)


def _fastdiag_solve_system(system: KKTSystem) -> np.ndarray:
    sym = _system_symbol(system)
    if sym is None:
        raise UnsupportedMethodError(
            f"{system.spec.name} carries Simpson weight blocks; "
            "fastdiag needs sine-diagonalizable blocks"
        )
    grid = system.grid
    k = system.n_fields
    chunks = np.split(system.rhs, k)
    rhs_hat = np.stack([_dst_field(c, grid) for c in chunks])     # (k, *fshape)
    # batch the k x k solves over frequencies
    A = np.moveaxis(sym, (0, 1), (-2, -1))                        # (*fshape, k, k)
    b = np.moveaxis(rhs_hat, 0, -1)[..., None]                    # (*fshape, k, 1)
    x_hat = np.linalg.solve(A, b)[..., 0]
    x_hat = np.moveaxis(x_hat, -1, 0)
    fields = []
    for i in range(k):
        out = _dst_field(x_hat[i], grid, inverse=True)
        fields.append(out.flatten(order="F") if grid.dim == 2 else out)
    return np.concatenate(fields)


def fast_diag_apply_inverse(symbol: np.ndarray, rhs, grid: Grid):
    """Apply the inverse of a sine-diagonalizable scalar operator.

    ``symbol`` is the eigenvalue array in field shape (from
    operator_symbol or built by the caller). rhs may be a GridFunction or
    raw interior vector; the return type matches.
    """
    sym = np.asarray(symbol, dtype=float)
    if np.any(sym == 0.0):
        raise PreconditionError("operator symbol has a zero eigenvalue")
    values = rhs.values if isinstance(rhs, GridFunction) else np.asarray(rhs, float)
    hat = _dst_field(values, grid) / sym
    out = _dst_field(hat, grid, inverse=True)
    if grid.dim == 2:
        out = out.flatten(order="F")
    if isinstance(rhs, GridFunction):
        return GridFunction(grid, out)
    return out


# --- public solve -----------------------------------------------------------

def _gmres_compat(A, b, rtol, restart, maxiter, M, callback):
    try:
        return spla.gmres(
            A, b, rtol=rtol, restart=restart, maxiter=maxiter, M=M,
            callback=callback, callback_type="pr_norm",
        )
    except TypeError:  # older scipy spells the tolerance "tol"
        return spla.gmres(
            A, b, tol=rtol, restart=restart, maxiter=maxiter, M=M,
            callback=callback, callback_type="pr_norm",
        )


def _trap_analogue_preconditioner(system: KKTSystem):
    """Fastdiag inverse of the system with Simpson weights -> identity."""
    k = system.n_fields
    grid = system.grid
    fshape = (grid.m, grid.m) if grid.dim == 2 else (grid.m,)
    sym = np.zeros((k, k) + fshape)
    for i, row in enumerate(system.recipe_rows):
        for j, entry in enumerate(row):
            if entry is None:
                continue
            coeff, kind = entry
            analogue = kind.replace("MQ", "MI").replace("Q", "I")
            sym[i, j] = coeff * operator_symbol(analogue, grid, system.gamma)
    A = np.moveaxis(sym, (0, 1), (-2, -1))
    Ainv = np.linalg.inv(A)

    def apply(vec):
        chunks = np.split(np.asarray(vec, float), k)
        hat = np.stack([_dst_field(c, grid) for c in chunks])
        xh = (Ainv @ np.moveaxis(hat, 0, -1)[..., None])[..., 0]
        xh = np.moveaxis(xh, -1, 0)
        outs = []
        for i in range(k):
            o = _dst_field(xh[i], grid, inverse=True)
            outs.append(o.flatten(order="F") if grid.dim == 2 else o)
        return np.concatenate(outs)

    n = system.matrix.shape[0]
    return spla.LinearOperator((n, n), matvec=apply)


def solve(system: KKTSystem, config: SolveConfig | None = None):
    """Solve the assembled system; returns (solution vector, SolveStats).

    The zero right-hand side short-circuits to the zero solution. A
    residual above the configured tolerance raises SolverError carrying
    the stats.
    """
    cfg = config or SolveConfig()
    t0 = time.perf_counter()
    b = system.rhs
    if not np.any(b):
        stats = SolveStats(cfg.method, 0, 0.0, (time.perf_counter() - t0) * 1e3)
        return np.zeros_like(b), stats

    iterations = 0
    if cfg.method == "direct":
        lu = spla.splu(sp.csc_matrix(system.matrix))
        x = lu.solve(b)
        for _ in range(3):  # iterative refinement with the same factorization
            if _rel_residual(system.matrix, x, b) <= cfg.rel_residual_tol:
                break
            x = x + lu.solve(b - system.matrix @ x)
    elif cfg.method == "fastdiag":
        x = _fastdiag_solve_system(system)
    else:
        M = _trap_analogue_preconditioner(system)
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = _gmres_compat(
            sp.csr_matrix(system.matrix),
            b,
            rtol=cfg.rel_residual_tol / 10.0,
            restart=50,
            maxiter=cfg.max_iterations,
            M=M,
            callback=cb,
        )
        iterations = count[0]
        if info > 0:
            stats = SolveStats(
                cfg.method, iterations, _rel_residual(system.matrix, x, b),
                (time.perf_counter() - t0) * 1e3,
            )
            raise SolverError(
                f"gmres failed to converge within {cfg.max_iterations} iterations", stats
            )

    rel = _rel_residual(system.matrix, x, b)
    stats = SolveStats(cfg.method, iterations, rel, (time.perf_counter() - t0) * 1e3)
    if rel > cfg.rel_residual_tol:
        raise SolverError(
            f"solve residual {rel:.3e} exceeds tolerance {cfg.rel_residual_tol:.1e}",
            stats,
        )
    return x, stats


def solve_fields(system: KKTSystem, config: SolveConfig | None = None):
    """Solve and split into a dict of GridFunctions keyed by layout name."""
    x, stats = solve(system, config)
    parts = system.split(x)
    return (
        {name: GridFunction(system.grid, vals) for name, vals in parts.items()},
        stats,
    )
