"""Uniform tensor-product grids on the unit interval/square.

A grid with n subdivisions per axis has mesh width h = 1/n and interior
nodes x_i = i*h, i = 1..n-1 per axis. Fields subject to homogeneous
Dirichlet conditions are stored on interior nodes only; the boundary value
0 is implicit in the difference operators.

Vector layout is lexicographic with x fastest: in 2D the entry for node
(i, j) sits at index (j-1)*(n-1) + (i-1). All norms use the h^dim-weighted
discrete inner product (v, w) = h^dim * sum(v_k * w_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FieldEvaluationError, GridMismatchError, PreconditionError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0,1)^dim with n subdivisions per axis."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise PreconditionError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 2:
            raise PreconditionError(f"need n >= 2 subdivisions, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def m(self) -> int:
        """Interior nodes per axis."""
        return self.n - 1

    @property
    def interior_count(self) -> int:
        return self.m**self.dim

    def axis_points(self, interior_only: bool = True) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n + 1)
        return x[1:-1] if interior_only else x

    def interior_coords(self):
        """Coordinates of interior nodes in vector order (x fastest).

        Returns (x,) in 1D and (x, y) flat arrays in 2D.
        """
        xi = self.axis_points()
        if self.dim == 1:
            return (xi,)
        X, Y = np.meshgrid(xi, xi, indexing="ij")
        return (X.flatten(order="F"), Y.flatten(order="F"))

    def full_coords(self):
        """Meshgrid over all nodes including the boundary ([i, j] = (x_i, y_j))."""
        x = self.axis_points(interior_only=False)
        if self.dim == 1:
            return (x,)
        return np.meshgrid(x, x, indexing="ij")


@dataclass(frozen=True)
class GridFunction:
    """Field values on the interior nodes of a grid.

    Values are immutable after construction; operations return new
    instances. The implicit boundary value is 0 for solution fields.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.interior_count,):
            raise GridMismatchError(
                f"expected {self.grid.interior_count} interior values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise FieldEvaluationError("grid function contains non-finite entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def as_2d(self) -> np.ndarray:
        """Interior values as an (m, m) array indexed [i, j] (2D grids only)."""
        if self.grid.dim != 2:
            raise GridMismatchError("as_2d is only defined on 2D grids")
        m = self.grid.m
        return self.values.reshape((m, m), order="F")


def _check_same_grid(v: GridFunction, w: GridFunction):
    if v.grid != w.grid:
        raise GridMismatchError(f"grid mismatch: {v.grid} vs {w.grid}")


def inner_product(v: GridFunction, w: GridFunction) -> float:
    """Discrete weighted inner product h^dim * sum(v_k w_k)."""
    _check_same_grid(v, w)
    return float(v.grid.h**v.grid.dim * np.dot(v.values, w.values))


def norm_l2(v: GridFunction) -> float:
    """Norm induced by the weighted inner product."""
    return float(v.grid.h ** (v.grid.dim / 2.0) * np.linalg.norm(v.values))


def norm_inf(v: GridFunction) -> float:
    if v.values.size == 0:
        return 0.0
    return float(np.max(np.abs(v.values)))


def weighted_l2(grid: Grid, values: np.ndarray) -> float:
    """Weighted l2 norm of a raw interior vector (no GridFunction wrapper)."""
    return float(grid.h ** (grid.dim / 2.0) * np.linalg.norm(values))


def sample(f, grid: Grid) -> GridFunction:
    """Sample a scalar field at the interior nodes.

    ``f`` takes one argument in 1D and two in 2D and must accept numpy
    arrays. Non-finite samples raise FieldEvaluationError.
    """
    coords = grid.interior_coords()
    vals = np.asarray(f(*coords), dtype=float)
    vals = np.broadcast_to(vals, (grid.interior_count,)).copy()
    if not np.all(np.isfinite(vals)):
        raise FieldEvaluationError("field evaluated to a non-finite value on the grid")
    return GridFunction(grid, vals)


def sample_full(f, grid: Grid) -> np.ndarray:
    """Sample a scalar field on all nodes including the boundary.

    Returns a length n+1 vector in 1D, an (n+1, n+1) array indexed [i, j]
    in 2D. Used by assemblies that apply averaging stencils to data.
    """
    coords = grid.full_coords()
    vals = np.asarray(f(*coords), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FieldEvaluationError("field evaluated to a non-finite value on the grid")
    return vals


def from_values(grid: Grid, values) -> GridFunction:
    return GridFunction(grid, np.asarray(values, dtype=float))


def zeros(grid: Grid) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.interior_count))


CSV_HEADER_2D = "i,j,x,y,value"
CSV_HEADER_1D = "i,x,value"


def write_csv(gf: GridFunction, path):
    """Write a field dump: header ``i,j,x,y,value`` (1D: ``i,x,value``).

    Rows follow the vector storage order (x index fastest). Floats use the
    fixed %.6e format so repeated runs are byte-identical.
    """
    g = gf.grid
    lines = []
    if g.dim == 1:
        lines.append(CSV_HEADER_1D)
        x = g.axis_points()
        for k, v in enumerate(gf.values):
            lines.append(f"{k + 1},{x[k]:.6e},{v:.6e}")
    else:
        lines.append(CSV_HEADER_2D)
        x = g.axis_points()
        m = g.m
        for k, v in enumerate(gf.values):
            i = k % m
            j = k // m
            lines.append(f"{i + 1},{j + 1},{x[i]:.6e},{x[j]:.6e},{v:.6e}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> GridFunction:
    """Read a field dump written by write_csv (tests and tooling)."""
    with open(path) as fh:
        header = fh.readline().strip()
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header == CSV_HEADER_1D:
        n = len(rows) + 1
        grid = Grid(1, n)
        vals = np.empty(len(rows))
        for row in rows:
            vals[int(row[0]) - 1] = float(row[2])
        return GridFunction(grid, vals)
    if header == CSV_HEADER_2D:
        m = int(round(len(rows) ** 0.5))
        if m * m != len(rows):
            raise PreconditionError("field CSV does not describe a square grid")
        grid = Grid(2, m + 1)
        vals = np.empty(m * m)
        for row in rows:
            i, j = int(row[0]) - 1, int(row[1]) - 1
            vals[j * m + i] = float(row[4])
        return GridFunction(grid, vals)
    raise PreconditionError(f"unrecognized field CSV header: {header!r}")
