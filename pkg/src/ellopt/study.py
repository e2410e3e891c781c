"""Convergence studies, oscillation metrics, sweeps and audits.

Errors are measured in the infinity norm against the exact optimal
solution on the interior nodes; observed orders use consecutive meshes,
log(e_prev/e_cur) / log(h_prev/h_cur), so non-dyadic mesh chains work.

Study solves use the adjoint-eliminated two-field forms where the scheme
admits one (the configurations the convergence statements are proved on),
then recover the adjoint from the gradient row; schemes without a
reduction (plain Simpson) solve the full three-field system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft

from .errors import NoExactSolutionError, PreconditionError
from .grid import Grid, GridFunction, norm_inf, sample, sample_full, weighted_l2
from . import linsolve, operators, problems, schemes

OSC_HIGH_FRACTION = 0.25  # top quarter of the per-axis frequency range


# --- oscillation index ------------------------------------------------------

def _axis_dirichlet_weights(grid: Grid) -> np.ndarray:
    return -linsolve.axis_eigenvalues(grid)  # positive: (4/h^2) sin^2(k pi h / 2)


def oscillation_index(u: GridFunction) -> float:
    """High-frequency fraction of the field's gradient spectral energy.

    The field is expanded in the discrete sine basis; each mode's squared
    coefficient is weighted by its Dirichlet energy (the gradient-energy
    eigenvalue), and the index is the weighted fraction carried by modes
    whose frequency on either axis lies in the top quarter of the range.
    Checkerboards score near 1, smooth fields near 0.
    """
    grid = u.grid
    m = grid.m
    cutoff = int(np.floor((1.0 - OSC_HIGH_FRACTION) * m))
    w = _axis_dirichlet_weights(grid)
    if grid.dim == 1:
        c = scipy.fft.dst(u.values, type=1)
        energy = w * c**2
        total = energy.sum()
        if total == 0.0:
            return 0.0
        return float(1.0 - energy[:cutoff].sum() / total)
    c = scipy.fft.dstn(u.as_2d(), type=1)
    energy = (w[:, None] + w[None, :]) * c**2
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(1.0 - energy[:cutoff, :cutoff].sum() / total)


# --- convergence studies ----------------------------------------------------

@dataclass
class MeshResult:
    n: int
    h: float
    err_z: float
    err_u: float
    err_p: float
    osc_index: float
    solve_ms: float
    residual: float
    iterations: int


@dataclass
class ConvergenceReport:
    scheme: schemes.SchemeSpec
    problem: str
    meshes: list
    rows: list
    orders_z: list
    orders_u: list
    orders_p: list
    verdict: str              # "convergent" | "non-convergent"
    order_estimate: Optional[float]

    @property
    def errors_u(self):
        return [r.err_u for r in self.rows]


def observed_orders(errors: Sequence[float], meshes: Sequence[int]) -> list:
    """Consecutive-mesh observed orders (defined from the second mesh on)."""
    orders = []
    for k in range(1, len(errors)):
        if errors[k - 1] <= 0 or errors[k] <= 0:
            orders.append(float("nan"))
            continue
        orders.append(
            float(np.log(errors[k - 1] / errors[k]) / np.log(meshes[k] / meshes[k - 1]))
        )
    return orders


# Schemes whose study solves go through the reduced form. For these the
# reduction is exact and well scaled; do4-trap in particular must be solved
# through its elimination identity to keep fourth order when the data do
# not vanish on the boundary. The reduced reg forms square the Laplacian
# (lap*(M - gamma*lap) products) and lose ~6 digits of residual headroom on
# fine meshes, so reg and Simpson schemes solve their full systems.
STUDY_REDUCED = {"od2", "od4", "do2-trap", "do4-trap"}


def solve_scheme(
    spec: schemes.SchemeSpec,
    problem: problems.ManufacturedProblem,
    n: int,
    config: Optional[linsolve.SolveConfig] = None,
    via: str = "auto",
):
    """Solve one (scheme, problem, mesh) cell; returns (fields dict, stats).

    via = "auto" solves the reduced form for the schemes in STUDY_REDUCED
    and the full three-field system otherwise; "full"/"reduced" force a
    path. The adjoint is recovered from the gradient row after a reduced
    solve.
    """
    if via not in ("auto", "full", "reduced"):
        raise PreconditionError(f"unknown solve path {via!r}")
    grid = Grid(problem.dim, n)
    use_reduced = via == "reduced" or (via == "auto" and spec.name in STUDY_REDUCED)
    assemble = schemes.assemble_reduced if use_reduced else schemes.assemble
    system = assemble(spec, grid, problem.f_field, problem.g_field)
    fields, stats = linsolve.solve_fields(system, config)
    if "p" not in fields:
        fields["p"] = schemes.recover_adjoint(spec, grid, fields["u"])
    return fields, stats


def run_convergence(
    spec: schemes.SchemeSpec,
    problem: problems.ManufacturedProblem,
    meshes: Sequence[int],
    config: Optional[linsolve.SolveConfig] = None,
    via: str = "auto",
) -> ConvergenceReport:
    """Mesh-refinement study for one scheme on one problem."""
    if not problem.has_exact:
        raise NoExactSolutionError(
            f"{problem.name} has no exact solution; convergence errors are undefined"
        )
    meshes = list(meshes)
    if meshes != sorted(meshes) or len(meshes) < 1:
        raise PreconditionError("meshes must be a nonempty ascending list")
    rows = []
    for n in meshes:
        grid = Grid(problem.dim, n)
        fields, stats = solve_scheme(spec, problem, n, config, via)
        exact = {
            w: problems.exact_on_grid(problem, w, grid).values for w in ("z", "u", "p")
        }
        osc = oscillation_index(fields["u"])
        rows.append(
            MeshResult(
                n=n,
                h=1.0 / n,
                err_z=float(np.max(np.abs(fields["z"].values - exact["z"]))),
                err_u=float(np.max(np.abs(fields["u"].values - exact["u"]))),
                err_p=float(np.max(np.abs(fields["p"].values - exact["p"]))),
                osc_index=osc,
                solve_ms=stats.elapsed_ms,
                residual=stats.final_relative_residual,
                iterations=stats.iterations,
            )
        )
    errs_u = [r.err_u for r in rows]
    orders_u = observed_orders(errs_u, meshes)
    orders_z = observed_orders([r.err_z for r in rows], meshes)
    orders_p = observed_orders([r.err_p for r in rows], meshes)
    non_convergent = len(rows) > 1 and errs_u[0] / errs_u[-1] < 2.0
    verdict = "non-convergent" if non_convergent else "convergent"
    order_estimate = None if non_convergent or not orders_u else float(np.median(orders_u))
    return ConvergenceReport(
        scheme=spec,
        problem=problem.name,
        meshes=meshes,
        rows=rows,
        orders_z=orders_z,
        orders_u=orders_u,
        orders_p=orders_p,
        verdict=verdict,
        order_estimate=order_estimate,
    )


# --- gamma sweep (u-only penalty) -------------------------------------------

@dataclass
class SweepResult:
    gamma: float
    fields: dict
    osc_index: float
    control_max: float


def gamma_sweep(
    problem: problems.ManufacturedProblem,
    gammas: Sequence[float],
    n: int,
    alpha: Optional[float] = None,
    config: Optional[linsolve.SolveConfig] = None,
) -> list:
    """Solve the Simpson second-order system with only the control penalized.

    The penalty sits inside the alpha grouping: the gradient row becomes
    alpha (Q - gamma lap) u - p = 0 while the adjoint row keeps its plain
    Simpson weights. gamma = 0 assembles the plain Simpson scheme itself.
    """
    a = problem.alpha if alpha is None else alpha
    grid = Grid(problem.dim, n)
    results = []
    for gamma in gammas:
        if gamma < 0:
            raise PreconditionError(f"gamma must be nonnegative, got {gamma}")
        if gamma == 0.0:
            spec = schemes.SchemeSpec("do2-simp", a)
        else:
            spec = schemes.SchemeSpec(
                schemes.UONLY_NAME, a, gamma_rule=("fixed", gamma)
            )
        system = schemes.assemble(spec, grid, problem.f_field, problem.g_field)
        fields, _ = linsolve.solve_fields(system, config)
        results.append(
            SweepResult(
                gamma=float(gamma),
                fields=fields,
                osc_index=oscillation_index(fields["u"]),
                control_max=norm_inf(fields["u"]),
            )
        )
    return results


# --- audits -------------------------------------------------------------

@dataclass
class EquivalenceAudit:
    scheme_a: str
    scheme_b: str
    problem: str
    n: int
    dz: float
    du: float
    adjoint_gap: float  # ||p_a - alpha u_a||_inf from the first scheme's solve


EQUIVALENCE_PAIRS = (
    ("do4-trap", "od4"),
    ("do2-trap-reg", "od2"),
    ("do4-trap-reg", "od4"),
)


def equivalence_audit(
    scheme_a: str,
    scheme_b: str,
    problem: problems.ManufacturedProblem,
    n: int,
    alpha: Optional[float] = None,
    config: Optional[linsolve.SolveConfig] = None,
) -> EquivalenceAudit:
    """Solve two schemes' full systems and compare their (z, u)."""
    a = problem.alpha if alpha is None else alpha
    fields = {}
    for name in (scheme_a, scheme_b):
        spec = schemes.SchemeSpec(name, a)
        grid = Grid(problem.dim, n)
        system = schemes.assemble(spec, grid, problem.f_field, problem.g_field)
        fields[name], _ = linsolve.solve_fields(system, config)
    fa, fb = fields[scheme_a], fields[scheme_b]
    dz = float(np.max(np.abs(fa["z"].values - fb["z"].values)))
    du = float(np.max(np.abs(fa["u"].values - fb["u"].values)))
    gap = float(np.max(np.abs(fa["p"].values - a * fa["u"].values)))
    return EquivalenceAudit(scheme_a, scheme_b, problem.name, n, dz, du, gap)


@dataclass
class StabilityAudit:
    alpha: float
    n: int
    sigma_min: float
    bound: float


def stability_audit(alpha: float, n: int, dim: int = 2) -> StabilityAudit:
    """Smallest singular value of [[I/alpha, lap], [-lap, I]] vs min(1/alpha, 1).

    Dense SVD; guarded to small grids.
    """
    grid = Grid(dim, n)
    count = grid.interior_count
    if 2 * count > 4000:
        raise PreconditionError(
            f"stability audit uses a dense SVD; n={n} ({2 * count} unknowns) is too large"
        )
    lap = operators.laplacian_5pt(grid).matrix.toarray()
    eye = np.eye(count)
    L = np.block([[eye / alpha, lap], [-lap, eye]])
    sigma_min = float(np.linalg.svd(L, compute_uv=False)[-1])
    return StabilityAudit(alpha, n, sigma_min, min(1.0 / alpha, 1.0))


@dataclass
class TruncationAudit:
    meshes: list
    norm_f: list
    norm_g: list
    norm_h: list
    norm_s: list
    orders: dict


def truncation_audit(
    problem: problems.ManufacturedProblem, meshes: Sequence[int]
) -> TruncationAudit:
    """Measured consistency residuals of both stencil families.

    Applies the discrete operators to exact-solution samples and subtracts
    the data side: second-order residuals from the five-point rows,
    fourth-order residuals from the compact rows (weighted l2 norms).
    """
    if not problem.has_exact:
        raise NoExactSolutionError(f"{problem.name} has no exact solution")
    nf, ng, nh, ns = [], [], [], []
    for n in meshes:
        grid = Grid(problem.dim, n)
        lap = operators.laplacian_5pt(grid).matrix
        F = operators.compact_f(grid).matrix
        R = operators.compact_r(grid).matrix
        zs = problems.exact_on_grid(problem, "z", grid).values
        us = problems.exact_on_grid(problem, "u", grid).values
        ps = problems.exact_on_grid(problem, "p", grid).values
        fs = sample(problem.f_field, grid).values
        gs = sample(problem.g_field, grid).values
        rf = operators.stencil_apply_r(sample_full(problem.f_field, grid), grid)
        rg = operators.stencil_apply_r(sample_full(problem.g_field, grid), grid)
        nf.append(weighted_l2(grid, -lap @ zs - us - fs))
        ng.append(weighted_l2(grid, -lap @ ps + zs - gs))
        nh.append(weighted_l2(grid, F @ zs - R @ us - rf))
        ns.append(weighted_l2(grid, F @ ps + R @ zs - rg))
    orders = {
        "F": observed_orders(nf, meshes),
        "G": observed_orders(ng, meshes),
        "H": observed_orders(nh, meshes),
        "S": observed_orders(ns, meshes),
    }
    return TruncationAudit(list(meshes), nf, ng, nh, ns, orders)


def lemma1_ratios(
    meshes: Sequence[int] = (8, 16, 32, 64),
    n_samples: int = 50,
    seed: int = 0,
    dim: int = 2,
) -> dict:
    """Max of ||v||_inf / ||A v|| over random interior v, for A in {lap, F}.

    The embedding-inequality constant stays bounded as the mesh refines;
    callers assert the max ratio does not grow between the coarsest and
    finest mesh.
    """
    rng = np.random.default_rng(seed)
    out = {"laplacian": {}, "compact_f": {}}
    for n in meshes:
        grid = Grid(dim, n)
        lap = operators.laplacian_5pt(grid).matrix
        F = operators.compact_f(grid).matrix
        best_lap = 0.0
        best_f = 0.0
        for _ in range(n_samples):
            v = rng.standard_normal(grid.interior_count)
            vinf = float(np.max(np.abs(v)))
            best_lap = max(best_lap, vinf / weighted_l2(grid, lap @ v))
            best_f = max(best_f, vinf / weighted_l2(grid, F @ v))
        out["laplacian"][n] = best_lap
        out["compact_f"][n] = best_f
    return out


def simpson_gap(field, meshes: Sequence[int], dim: int = 2) -> list:
    """||(I - Q) w||_inf for samples of a fixed smooth field, per mesh.

    The gap stays O(1) as the mesh refines; it is the operator-level form
    of the Simpson scheme's inconsistency.
    """
    gaps = []
    for n in meshes:
        grid = Grid(dim, n)
        Q = operators.simpson_q(grid).matrix
        w = sample(field, grid).values
        gaps.append(float(np.max(np.abs(w - Q @ w))))
    return gaps


def averaging_gap_orders(field, meshes: Sequence[int], dim: int = 2):
    """||(R - I) w||_inf per mesh with observed orders (expected 2)."""
    gaps = []
    for n in meshes:
        grid = Grid(dim, n)
        R = operators.compact_r(grid).matrix
        w = sample(field, grid).values
        gaps.append(float(np.max(np.abs(R @ w - w))))
    return gaps, observed_orders(gaps, meshes)


# --- Ex4 qualitative runs -----------------------------------------------

def ex4_smooth_mask(grid: Grid, margin_cells: int = 2) -> np.ndarray:
    """Interior nodes at least margin_cells*h away from the target's jumps."""
    x, y = grid.interior_coords()
    margin = margin_cells * grid.h
    near = (np.abs(np.abs(x - 0.5) - 0.25) <= margin) | (
        np.abs(np.abs(y - 0.5) - 0.25) <= margin
    )
    return ~near


@dataclass
class TrackingResult:
    alpha: float
    tracking_error: float  # weighted l2 of z - g over the smooth-region mask
    osc_index_u: float


def ex4_tracking(
    n: int,
    alphas: Sequence[float] = (1e-4, 1e-8),
    scheme: str = "do4-simp-reg",
    config: Optional[linsolve.SolveConfig] = None,
) -> list:
    """Tracking quality of the discontinuous-target problem vs alpha."""
    results = []
    for a in alphas:
        problem = problems.make("ex4", alpha=a)
        grid = Grid(2, n)
        fields, _ = solve_scheme(schemes.SchemeSpec(scheme, a), problem, n, config)
        gvals = sample(problem.g_field, grid).values
        mask = ex4_smooth_mask(grid)
        diff = (fields["z"].values - gvals)[mask]
        err = float(grid.h ** (grid.dim / 2.0) * np.linalg.norm(diff))
        results.append(
            TrackingResult(a, err, oscillation_index(fields["u"]))
        )
    return results


# --- report emission ------------------------------------------------------

REPORT_CSV_HEADER = (
    "scheme,problem,n,h,err_z,err_u,err_p,order_u,osc_index,solve_ms,residual"
)
TABLE_CSV_HEADER_PREFIX = "h"


def report_csv_lines(report: ConvergenceReport) -> list:
    lines = []
    for k, r in enumerate(report.rows):
        order = "" if k == 0 else f"{report.orders_u[k - 1]:.6e}"
        lines.append(
            f"{report.scheme.name},{report.problem},{r.n},{r.h:.6e},"
            f"{r.err_z:.6e},{r.err_u:.6e},{r.err_p:.6e},{order},"
            f"{r.osc_index:.6e},{r.solve_ms:.3f},{r.residual:.6e}"
        )
    return lines


def table_csv(reports: Sequence[ConvergenceReport]) -> str:
    """Error/order table across schemes (paper-table layout), %.6e floats."""
    meshes = reports[0].meshes
    for rep in reports:
        if rep.meshes != meshes:
            raise PreconditionError("all reports in one table need the same meshes")
    header = ["h"]
    for rep in reports:
        header += [f"{rep.scheme.name}_err", f"{rep.scheme.name}_order"]
    lines = [",".join(header)]
    for k, n in enumerate(meshes):
        cells = [f"1/{n}"]
        for rep in reports:
            err = f"{rep.rows[k].err_u:.6e}"
            if k == 0:
                order = ""
            else:
                o = rep.orders_u[k - 1]
                order = "" if rep.verdict == "non-convergent" else f"{o:.6e}"
            cells += [err, order]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def table_markdown(reports: Sequence[ConvergenceReport], title: str = "") -> str:
    """Markdown table in the published layout: 2-digit errors, 1-digit orders."""
    meshes = reports[0].meshes
    head = ["h"]
    for rep in reports:
        head += [f"{rep.scheme.name} Error", "Order"]
    lines = []
    if title:
        lines.append(f"### {title}")
        lines.append("")
    lines.append("| " + " | ".join(head) + " |")
    lines.append("|" + "---|" * len(head))
    for k, n in enumerate(meshes):
        cells = [f"1/{n}"]
        for rep in reports:
            cells.append(f"{rep.rows[k].err_u:.1e}")
            if k == 0:
                cells.append("")
            elif rep.verdict == "non-convergent":
                cells.append("--")
            else:
                cells.append(f"{rep.orders_u[k - 1]:.1f}")
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    for rep in reports:
        if rep.verdict == "convergent":
            lines.append(
                f"- {rep.scheme.name}: convergent, observed order ~ {rep.order_estimate:.2f}"
            )
        else:
            lines.append(f"- {rep.scheme.name}: non-convergent")
    return "\n".join(lines) + "\n"
