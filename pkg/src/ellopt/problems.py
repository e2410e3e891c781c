"""Manufactured test problems with known optimal solutions.

Each problem fixes alpha and data fields (f, g) so that the optimality
system

    -lap z - u = f,   -lap p + z = g,   alpha*u - p = 0,   z = p = 0 on the boundary

has the stated closed-form solution. f and g are hand-derived closed forms;
construction cross-checks them against a high-precision finite-difference
evaluation of -lap z - u and z - lap p at random points, so transcription
errors fail fast.

ex4 is the non-attainable discontinuous-target case: f = 0, g piecewise,
no exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import mpmath

from .errors import NoExactSolutionError, PreconditionError
from .grid import Grid, GridFunction, sample

PROBLEM_NAMES = ("ex1", "ex2", "ex3", "ex4")

_CONSISTENCY_POINTS = 100
_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class ManufacturedProblem:
    name: str
    dim: int
    alpha: float
    exact_z: Optional[Callable]
    exact_u: Optional[Callable]
    exact_p: Optional[Callable]
    f_field: Callable
    g_field: Callable
    description: str = ""

    @property
    def has_exact(self) -> bool:
        return self.exact_z is not None


def _fd_laplacian(field, point, dim, lib_field):
    """Second-order central Laplacian of a scalar field at one point.

    Evaluated in mpmath arithmetic (40 digits, step 1e-9) so the truncation
    and roundoff both sit far below the 1e-10 consistency tolerance.
    """
    h = mpmath.mpf("1e-9")
    if dim == 1:
        (x,) = point
        return (lib_field(x + h) + lib_field(x - h) - 2 * lib_field(x)) / h**2
    x, y = point
    return (
        lib_field(x + h, y)
        + lib_field(x - h, y)
        + lib_field(x, y + h)
        + lib_field(x, y - h)
        - 4 * lib_field(x, y)
    ) / h**2


def _verify_consistency(problem: ManufacturedProblem, mp_z, mp_p, seed: int = 1234):
    """Check f = -lap z - u and g = z - lap p at random interior points."""
    rng = np.random.default_rng(seed)
    old_dps = mpmath.mp.dps
    mpmath.mp.dps = 40
    try:
        for _ in range(_CONSISTENCY_POINTS):
            pt = tuple(mpmath.mpf(float(c)) for c in rng.uniform(0.05, 0.95, problem.dim))
            pt_f = tuple(float(c) for c in pt)
            lap_z = float(_fd_laplacian(None, pt, problem.dim, mp_z))
            lap_p = float(_fd_laplacian(None, pt, problem.dim, mp_p))
            f_expect = -lap_z - problem.exact_u(*pt_f)
            g_expect = problem.exact_z(*pt_f) - lap_p
            if abs(f_expect - problem.f_field(*pt_f)) > _CONSISTENCY_TOL * (
                1.0 + abs(f_expect)
            ):
                raise PreconditionError(
                    f"{problem.name}: closed-form f inconsistent with -lap z - u at {pt_f}"
                )
            if abs(g_expect - problem.g_field(*pt_f)) > _CONSISTENCY_TOL * (
                1.0 + abs(g_expect)
            ):
                raise PreconditionError(
                    f"{problem.name}: closed-form g inconsistent with z - lap p at {pt_f}"
                )
    finally:
        mpmath.mp.dps = old_dps


def _make_ex1(alpha: float) -> ManufacturedProblem:
    pi = np.pi

    def z(x):
        return np.sin(pi * x)

    def u(x):
        return np.sin(2 * pi * x) / alpha

    def p(x):
        return np.sin(2 * pi * x)

    def f(x):
        return pi**2 * np.sin(pi * x) - np.sin(2 * pi * x) / alpha

    def g(x):
        return np.sin(pi * x) + 4 * pi**2 * np.sin(2 * pi * x)

    prob = ManufacturedProblem(
        "ex1", 1, alpha, z, u, p, f, g, "1D sine state / double-frequency control"
    )
    mp_z = lambda x: mpmath.sin(mpmath.pi * x)
    mp_p = lambda x: mpmath.sin(2 * mpmath.pi * x)
    _verify_consistency(prob, mp_z, mp_p)
    return prob


def _make_ex2(alpha: float) -> ManufacturedProblem:
    pi = np.pi

    def z(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def u(x, y):
        return np.sin(2 * pi * x) * np.sin(2 * pi * y) / alpha

    def p(x, y):
        return np.sin(2 * pi * x) * np.sin(2 * pi * y)

    def f(x, y):
        return 2 * pi**2 * np.sin(pi * x) * np.sin(pi * y) - np.sin(
            2 * pi * x
        ) * np.sin(2 * pi * y) / alpha

    def g(x, y):
        return np.sin(pi * x) * np.sin(pi * y) + 8 * pi**2 * np.sin(
            2 * pi * x
        ) * np.sin(2 * pi * y)

    prob = ManufacturedProblem(
        "ex2", 2, alpha, z, u, p, f, g, "2D sine state / double-frequency control"
    )
    mp_z = lambda x, y: mpmath.sin(mpmath.pi * x) * mpmath.sin(mpmath.pi * y)
    mp_p = lambda x, y: mpmath.sin(2 * mpmath.pi * x) * mpmath.sin(2 * mpmath.pi * y)
    _verify_consistency(prob, mp_z, mp_p)
    return prob


def _make_ex3(alpha: float) -> ManufacturedProblem:
    pi = np.pi

    def z(x, y):
        return np.sin(2 * pi * x) * np.sin(2 * pi * y) * np.exp(x + y)

    def u(x, y):
        return np.sin(4 * pi * x) * np.sin(4 * pi * y) * np.exp(x - y) / alpha

    def p(x, y):
        return np.sin(4 * pi * x) * np.sin(4 * pi * y) * np.exp(x - y)

    # lap z via the product structure z = phi(x) psi(y), phi = sin(2 pi x) e^x
    def _lap_z(x, y):
        phi = np.sin(2 * pi * x) * np.exp(x)
        psi = np.sin(2 * pi * y) * np.exp(y)
        phipp = ((1 - 4 * pi**2) * np.sin(2 * pi * x) + 4 * pi * np.cos(2 * pi * x)) * np.exp(x)
        psipp = ((1 - 4 * pi**2) * np.sin(2 * pi * y) + 4 * pi * np.cos(2 * pi * y)) * np.exp(y)
        return phipp * psi + phi * psipp

    # lap p with p = a(x) b(y), a = sin(4 pi x) e^x, b = sin(4 pi y) e^(-y)
    def _lap_p(x, y):
        a = np.sin(4 * pi * x) * np.exp(x)
        b = np.sin(4 * pi * y) * np.exp(-y)
        app = ((1 - 16 * pi**2) * np.sin(4 * pi * x) + 8 * pi * np.cos(4 * pi * x)) * np.exp(x)
        bpp = ((1 - 16 * pi**2) * np.sin(4 * pi * y) - 8 * pi * np.cos(4 * pi * y)) * np.exp(-y)
        return app * b + a * bpp

    def f(x, y):
        return -_lap_z(x, y) - u(x, y)

    def g(x, y):
        return z(x, y) - _lap_p(x, y)

    prob = ManufacturedProblem(
        "ex3", 2, alpha, z, u, p, f, g, "2D modulated-exponential state and control"
    )
    mp_z = lambda x, y: mpmath.sin(2 * mpmath.pi * x) * mpmath.sin(2 * mpmath.pi * y) * mpmath.exp(x + y)
    mp_p = lambda x, y: mpmath.sin(4 * mpmath.pi * x) * mpmath.sin(4 * mpmath.pi * y) * mpmath.exp(x - y)
    _verify_consistency(prob, mp_z, mp_p)
    return prob


def ex4_target(x, y):
    """Discontinuous target: sin(pi x) sin(pi y) on the four corner blocks."""
    inside = (np.abs(x - 0.5) >= 0.25) & (np.abs(y - 0.5) >= 0.25)
    return np.where(inside, np.sin(np.pi * x) * np.sin(np.pi * y), 0.0)


def _make_ex4(alpha: float) -> ManufacturedProblem:
    def f(x, y):
        return np.zeros_like(np.asarray(x, dtype=float))

    return ManufacturedProblem(
        "ex4", 2, alpha, None, None, None, f, ex4_target,
        "non-attainable discontinuous target, f = 0",
    )


_DEFAULT_ALPHA = {"ex1": 0.1, "ex2": 0.1, "ex3": 1.0, "ex4": 1e-4}
_BUILDERS = {"ex1": _make_ex1, "ex2": _make_ex2, "ex3": _make_ex3, "ex4": _make_ex4}


def make(name: str, alpha: Optional[float] = None) -> ManufacturedProblem:
    """Build a named problem, optionally overriding its alpha."""
    if name not in _BUILDERS:
        raise PreconditionError(
            f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}"
        )
    a = _DEFAULT_ALPHA[name] if alpha is None else float(alpha)
    if a <= 0:
        raise PreconditionError(f"alpha must be positive, got {a}")
    return _BUILDERS[name](a)


def exact_on_grid(problem: ManufacturedProblem, which: str, grid: Grid) -> GridFunction:
    """Sample an exact field (z, u or p) on a grid for error computation."""
    if not problem.has_exact:
        raise NoExactSolutionError(
            f"{problem.name} has no exact optimal solution; field dumps only"
        )
    if grid.dim != problem.dim:
        raise PreconditionError(
            f"{problem.name} is {problem.dim}D but the grid is {grid.dim}D"
        )
    fields = {"z": problem.exact_z, "u": problem.exact_u, "p": problem.exact_p}
    if which not in fields:
        raise PreconditionError(f"unknown exact field {which!r}")
    return sample(fields[which], grid)
