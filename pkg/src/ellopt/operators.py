"""Sparse difference operators on interior nodes.

All operators are assembled as explicit sparse matrices (entrywise access
is needed by the identity and equivalence checks). Sign convention: the
stored Laplacian is the negative-definite lap(grid); schemes that need the
negative Laplacian use -lap explicitly.

2D operators come from the 1D second-difference matrix A = tridiag(1,-2,1)/h^2
via Kronecker products (x fastest):

    lap = kron(I, A) + kron(A, I)
    F   = -lap - (h^2/6) kron(A, A)       9-point fourth-order stencil
    R   = I + (h^2/12) lap                right-hand-side averaging weights

In 1D the compact pair degenerates to F = -A and R = I + (h^2/12) A
(tridiag(1,10,1)/12), the classical fourth-order pair; the 1D fourth-order
path is an extension of the displayed 2D stencils.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import GridMismatchError, PreconditionError, SimpsonParityError
from .grid import Grid


@dataclass(frozen=True)
class DiscreteOperator:
    """A sparse linear operator on interior-node vectors."""

    grid: Grid
    kind: str
    matrix: sp.csr_matrix

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    @property
    def shape(self):
        return self.matrix.shape


def _lap1d(n: int) -> sp.csr_matrix:
    h = 1.0 / n
    m = n - 1
    return sp.diags(
        [np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1], format="csr"
    ) / h**2


def second_difference_1d(grid: Grid) -> sp.csr_matrix:
    """The 1D Dirichlet second-difference matrix A = tridiag(1,-2,1)/h^2."""
    return _lap1d(grid.n)


@lru_cache(maxsize=None)
def laplacian_5pt(grid: Grid) -> DiscreteOperator:
    """Five-point discrete Laplacian (negative definite)."""
    A = _lap1d(grid.n)
    if grid.dim == 1:
        mat = A
    else:
        eye = sp.identity(grid.m, format="csr")
        mat = sp.kron(eye, A) + sp.kron(A, eye)
    return DiscreteOperator(grid, "laplacian5pt", sp.csr_matrix(mat))


@lru_cache(maxsize=None)
def compact_f(grid: Grid) -> DiscreteOperator:
    """Fourth-order compact negative-Laplacian stencil."""
    A = _lap1d(grid.n)
    if grid.dim == 1:
        mat = -A
    else:
        h = grid.h
        eye = sp.identity(grid.m, format="csr")
        lap = sp.kron(eye, A) + sp.kron(A, eye)
        mat = -lap - (h**2 / 6.0) * sp.kron(A, A)
    return DiscreteOperator(grid, "compact_f", sp.csr_matrix(mat))


@lru_cache(maxsize=None)
def compact_r(grid: Grid) -> DiscreteOperator:
    """Right-hand-side averaging weights of the compact scheme."""
    lap = laplacian_5pt(grid).matrix
    mat = sp.identity(grid.interior_count, format="csr") + (grid.h**2 / 12.0) * lap
    return DiscreteOperator(grid, "compact_r", sp.csr_matrix(mat))


def simpson_axis_weights(n: int) -> np.ndarray:
    """Composite Simpson interior weights per axis: 4/3 at odd nodes, 2/3 at even."""
    if n % 2 != 0:
        raise SimpsonParityError(
            f"composite Simpson weights need an even number of subintervals, got n={n}"
        )
    i = np.arange(1, n)
    return np.where(i % 2 == 1, 4.0 / 3.0, 2.0 / 3.0)


@lru_cache(maxsize=None)
def simpson_q(grid: Grid) -> DiscreteOperator:
    """Diagonal Simpson quadrature weight matrix (h^dim scaling omitted)."""
    w = simpson_axis_weights(grid.n)
    diag = w if grid.dim == 1 else np.kron(w, w)
    return DiscreteOperator(grid, "simpson_q", sp.csr_matrix(sp.diags(diag)))


@lru_cache(maxsize=None)
def identity(grid: Grid) -> DiscreteOperator:
    return DiscreteOperator(
        grid, "identity", sp.csr_matrix(sp.identity(grid.interior_count))
    )


@lru_cache(maxsize=None)
def reg_mass(base: str, gamma: float, grid: Grid) -> DiscreteOperator:
    """Regularized mass operator M - gamma*lap with M = I or Simpson Q.

    base is "identity" or "simpson_q"; gamma >= 0. Symmetric positive
    definite for gamma >= 0 (positive diagonal plus gamma times the
    positive-definite negative Laplacian).
    """
    if gamma < 0:
        raise PreconditionError(f"gamma must be nonnegative, got {gamma}")
    if base == "identity":
        M = identity(grid).matrix
    elif base == "simpson_q":
        M = simpson_q(grid).matrix
    else:
        raise PreconditionError(f"unknown reg_mass base {base!r}")
    mat = M - gamma * laplacian_5pt(grid).matrix
    return DiscreteOperator(grid, f"reg_mass[{base},gamma={gamma}]", sp.csr_matrix(mat))


def _forward_diff_1d(n: int) -> sp.csr_matrix:
    """Forward differences on all n edges of [0,1] for an interior vector.

    Edge e joins nodes e and e+1 (node values 0 at the boundary); row e is
    (v_{e+1} - v_e)/h restricted to interior columns. Shape (n, n-1).
    """
    h = 1.0 / n
    m = n - 1
    rows, cols, vals = [], [], []
    for e in range(n):
        if e + 1 <= m:
            rows.append(e)
            cols.append(e)
            vals.append(1.0 / h)
        if e >= 1:
            rows.append(e)
            cols.append(e - 1)
            vals.append(-1.0 / h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, m))


@lru_cache(maxsize=None)
def grad_forward(grid: Grid) -> DiscreteOperator:
    """Forward-difference gradient; rectangular (edges x interior nodes).

    Summation by parts: h^dim * |grad v|^2 = (v, -lap v) for interior
    vectors (boundary values implicitly 0).
    """
    D = _forward_diff_1d(grid.n)
    if grid.dim == 1:
        mat = D
    else:
        eye = sp.identity(grid.m, format="csr")
        Gx = sp.kron(eye, D)   # x-direction edges
        Gy = sp.kron(D, eye)   # y-direction edges
        mat = sp.vstack([Gx, Gy])
    return DiscreteOperator(grid, "grad_forward", sp.csr_matrix(mat))


def check_commute(a: DiscreteOperator, b: DiscreteOperator) -> float:
    """Max absolute entry of the commutator AB - BA."""
    if a.grid != b.grid or a.shape != b.shape:
        raise GridMismatchError("commutator needs two operators on the same grid")
    comm = a.matrix @ b.matrix - b.matrix @ a.matrix
    return 0.0 if comm.nnz == 0 else float(np.max(np.abs(comm.data)))


def max_abs_entry(op: DiscreteOperator) -> float:
    mat = op.matrix
    return 0.0 if mat.nnz == 0 else float(np.max(np.abs(mat.data)))


def stencil_apply_r(full_values: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply the averaging stencil R to full-grid samples (boundary included).

    This is the compact-scheme data application: at interior nodes next to
    the boundary the stencil picks up the data's boundary samples, which an
    interior-matrix product would drop. Returns an interior vector.
    """
    if grid.dim == 1:
        c = full_values[1:-1]
        return (10.0 * c + full_values[:-2] + full_values[2:]) / 12.0
    c = full_values[1:-1, 1:-1]
    out = (
        8.0 * c
        + full_values[:-2, 1:-1]
        + full_values[2:, 1:-1]
        + full_values[1:-1, :-2]
        + full_values[1:-1, 2:]
    ) / 12.0
    return out.flatten(order="F")


def stencil_apply_lap(full_values: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply the 5-point Laplacian stencil to full-grid samples."""
    h2 = grid.h**2
    if grid.dim == 1:
        c = full_values[1:-1]
        return (full_values[:-2] + full_values[2:] - 2.0 * c) / h2
    c = full_values[1:-1, 1:-1]
    out = (
        full_values[:-2, 1:-1]
        + full_values[2:, 1:-1]
        + full_values[1:-1, :-2]
        + full_values[1:-1, 2:]
        - 4.0 * c
    ) / h2
    return out.flatten(order="F")


def axis_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of the 1D second-difference matrix in the sine basis.

    lambda_i = -(4/h^2) sin^2(i*pi*h/2), i = 1..n-1; the 2D Laplacian,
    compact pair and their gamma-composites are all polynomials in the per-
    axis eigenvalues.
    """
    k = np.arange(1, grid.n)
    h = grid.h
    return -(4.0 / h**2) * np.sin(k * np.pi * h / 2.0) ** 2


def write_matrix_market(op: DiscreteOperator, path):
    """Dump an operator in Matrix Market coordinate format."""
    mat = op.matrix.tocoo()
    square = mat.shape[0] == mat.shape[1]
    symmetric = False
    if square:
        diff = (mat - mat.T).tocoo()
        symmetric = diff.nnz == 0 or np.max(np.abs(diff.data)) == 0.0
    scipy.io.mmwrite(
        str(path), mat, symmetry="symmetric" if symmetric else "general"
    )
