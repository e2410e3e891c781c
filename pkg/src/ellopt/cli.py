"""Command-line front end.

Subcommands: solve, converge, sweep, audit, identities. Options may come
from flags or a flat key=value config file (--config); flags win. Exit
codes: 0 success, 1 identity-check failure, 2 precondition/usage error,
3 solver failure.

Every run writes a manifest.json into the output directory naming each
artifact with its parameters. Numeric CSV output uses fixed %.6e
formatting; apart from the wall-clock column of report.csv, repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import PreconditionError, SolverError
from .grid import Grid, write_csv
from . import linsolve, operators, problems, schemes, study

SCHEME_CATALOG = """\
schemes (spelled exactly as below):
  od2           five-point optimality system: -lap z - u = f; -lap p + z = g; a u - p = 0
  od4           compact nine-point system: F z - R u = R f; F p + R z = R g; a u - p = 0
  do2-trap      trapezoidal objective + five-point state (identical to od2)
  do2-simp      Simpson objective + five-point state (checkerboard-unstable)
  do4-trap      trapezoidal objective + compact state
  do4-simp      Simpson objective + compact state (checkerboard-unstable)
  do2-trap-reg  gradient-penalized mass I - gamma*lap, gamma = 1
  do2-simp-reg  gradient-penalized mass Q - gamma*lap, gamma = 1
  do4-trap-reg  gradient-penalized mass I - gamma*lap, gamma = 1/h^2
  do4-simp-reg  gradient-penalized mass Q - gamma*lap, gamma = 1/h^2

problems:
  ex1  1D: z = sin(pi x), u = sin(2 pi x)/alpha, alpha = 0.1
  ex2  2D: z = sin(pi x) sin(pi y), u = sin(2 pi x) sin(2 pi y)/alpha, alpha = 0.1
  ex3  2D: z = sin(2 pi x) sin(2 pi y) e^(x+y), u = sin(4 pi x) sin(4 pi y) e^(x-y), alpha = 1
  ex4  2D: discontinuous corner-block target, f = 0, alpha = 1e-4 (no exact solution)
"""


def _parse_int_list(text: str, what: str):
    if not text.strip():
        raise PreconditionError(f"empty {what} list")
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise PreconditionError(f"malformed {what} list {text!r}") from exc
    if not values:
        raise PreconditionError(f"empty {what} list")
    return values


def _parse_float_list(text: str, what: str):
    if not text.strip():
        raise PreconditionError(f"empty {what} list")
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise PreconditionError(f"malformed {what} list {text!r}") from exc


def _load_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PreconditionError(f"config line without key=value: {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellopt",
        description="Finite-difference solvers and convergence studies for "
        "linear-quadratic elliptic optimal control.",
        epilog=SCHEME_CATALOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_scheme=True):
        if needs_scheme:
            p.add_argument("--scheme", help="scheme name (comma-separated for converge)")
        p.add_argument("--problem", help="problem name (ex1..ex4)")
        p.add_argument("--alpha", type=float, help="override the problem's alpha")
        p.add_argument("--gamma", type=float,
                       help="fixed regularization weight for *-reg schemes")
        p.add_argument("--method", choices=linsolve.METHODS, help="linear solver")
        p.add_argument("--via", choices=("auto", "full", "reduced"),
                       help="solve the full 3-field or reduced 2-field system")
        p.add_argument("--out", help="output directory (default ellopt-out)")
        p.add_argument("--config", help="flat key=value config file; flags win")

    p_solve = sub.add_parser("solve", help="solve one scheme on one mesh")
    common(p_solve)
    p_solve.add_argument("--n", type=int, help="mesh subdivisions per axis")

    p_conv = sub.add_parser("converge", help="mesh-refinement study")
    common(p_conv)
    p_conv.add_argument("--meshes", help="comma-separated mesh list, e.g. 20,40,60")
    p_conv.add_argument("--dump-fields", action="store_true",
                        help="also dump z/p/u fields on the finest mesh")

    p_sweep = sub.add_parser("sweep", help="u-only regularization gamma sweep")
    common(p_sweep, needs_scheme=False)
    p_sweep.add_argument("--gammas", help="comma-separated gamma list")
    p_sweep.add_argument("--n", type=int, help="mesh subdivisions per axis")

    p_audit = sub.add_parser("audit", help="equivalence/stability/consistency audits")
    common(p_audit, needs_scheme=False)
    p_audit.add_argument("--n", type=int, help="mesh for the equivalence audits")

    p_id = sub.add_parser("identities", help="operator identity suite")
    p_id.add_argument("--n", help="comma-separated mesh list (default 8,10,16)")
    p_id.add_argument("--out", help="output directory (default ellopt-out)")
    p_id.add_argument("--config", help="flat key=value config file; flags win")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config)
        for key, value in file_values.items():
            if not hasattr(args, key):
                raise PreconditionError(f"unknown config key {key!r}")
            if getattr(args, key) in (None, False):
                if key in ("alpha", "gamma"):
                    setattr(args, key, float(value))
                elif key == "n" and args.command in ("solve", "sweep", "audit"):
                    setattr(args, key, int(value))
                elif key == "dump_fields":
                    setattr(args, key, value.lower() in ("1", "true", "yes"))
                else:
                    setattr(args, key, value)
    return args


def parse_args(argv=None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    return _merge_config(args)


def _scheme_spec(name: str, alpha: float, gamma) -> schemes.SchemeSpec:
    rule = None
    if gamma is not None and (name.endswith("-reg")):
        rule = ("fixed", float(gamma))
    return schemes.SchemeSpec(name, alpha, gamma_rule=rule)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise PreconditionError(f"--{name.replace('_', '-')} is required")


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", None) or "ellopt-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(outdir: Path, command: str, parameters: dict, artifacts: list):
    manifest = {
        "command": command,
        "parameters": parameters,
        "artifacts": artifacts,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _solve_config(args) -> linsolve.SolveConfig:
    return linsolve.SolveConfig(method=getattr(args, "method", None) or "direct")


def cmd_solve(args) -> int:
    _require(args, "scheme", "problem", "n")
    problem = problems.make(args.problem, alpha=args.alpha)
    alpha = problem.alpha
    spec = _scheme_spec(args.scheme, alpha, args.gamma)
    via = args.via or "auto"
    fields, stats = study.solve_scheme(
        spec, problem, args.n, _solve_config(args), via
    )
    outdir = _outdir(args)
    grid = Grid(problem.dim, args.n)
    artifacts = []
    for name in ("z", "p", "u"):
        path = outdir / f"{args.scheme}_{args.problem}_n{args.n}_{name}.csv"
        write_csv(fields[name], path)
        artifacts.append({"path": path.name, "kind": "field-csv", "field": name})
    print(
        f"{args.scheme} on {args.problem}, n={args.n}: "
        f"residual {stats.final_relative_residual:.2e}, "
        f"{stats.elapsed_ms:.1f} ms ({stats.method})"
    )
    if problem.has_exact:
        for name in ("z", "u", "p"):
            exact = problems.exact_on_grid(problem, name, grid)
            err = float(np.max(np.abs(fields[name].values - exact.values)))
            print(f"  inf-norm error in {name}: {err:.6e}")
    osc = study.oscillation_index(fields["u"])
    print(f"  oscillation index of u: {osc:.4f}")
    _write_manifest(
        outdir, "solve",
        {"scheme": args.scheme, "problem": args.problem, "n": args.n,
         "alpha": alpha, "method": stats.method, "via": via},
        artifacts,
    )
    return 0


def cmd_converge(args) -> int:
    _require(args, "scheme", "problem", "meshes")
    meshes = _parse_int_list(args.meshes, "mesh")
    problem = problems.make(args.problem, alpha=args.alpha)
    scheme_names = [s.strip() for s in args.scheme.split(",") if s.strip()]
    if not scheme_names:
        raise PreconditionError("empty scheme list")
    via = args.via or "auto"
    cfg = _solve_config(args)
    reports = []
    for name in scheme_names:
        spec = _scheme_spec(name, problem.alpha, args.gamma)
        reports.append(study.run_convergence(spec, problem, meshes, cfg, via))
    outdir = _outdir(args)
    artifacts = []
    table_md = study.table_markdown(
        reports, title=f"Control error on {args.problem} (alpha={problem.alpha:g})"
    )
    (outdir / "table.md").write_text(table_md)
    artifacts.append({"path": "table.md", "kind": "table-markdown"})
    (outdir / "table.csv").write_text(study.table_csv(reports))
    artifacts.append({"path": "table.csv", "kind": "table-csv"})
    report_lines = [study.REPORT_CSV_HEADER]
    for rep in reports:
        report_lines += study.report_csv_lines(rep)
    (outdir / "report.csv").write_text("\n".join(report_lines) + "\n")
    artifacts.append({"path": "report.csv", "kind": "report-csv"})
    if getattr(args, "dump_fields", False):
        for name in scheme_names:
            spec = _scheme_spec(name, problem.alpha, args.gamma)
            fields, _ = study.solve_scheme(spec, problem, meshes[-1], cfg, via)
            for fname in ("z", "p", "u"):
                path = outdir / f"{name}_{args.problem}_n{meshes[-1]}_{fname}.csv"
                write_csv(fields[fname], path)
                artifacts.append(
                    {"path": path.name, "kind": "field-csv", "field": fname}
                )
    print(table_md)
    _write_manifest(
        outdir, "converge",
        {"schemes": scheme_names, "problem": args.problem, "meshes": meshes,
         "alpha": problem.alpha, "method": cfg.method, "via": via},
        artifacts,
    )
    return 0


def cmd_sweep(args) -> int:
    _require(args, "problem", "gammas", "n")
    gammas = _parse_float_list(args.gammas, "gamma")
    problem = problems.make(args.problem, alpha=args.alpha)
    results = study.gamma_sweep(problem, gammas, args.n, config=_solve_config(args))
    outdir = _outdir(args)
    artifacts = []
    summary = ["gamma,osc_index,control_max"]
    for res in results:
        path = outdir / f"sweep_{args.problem}_n{args.n}_gamma{res.gamma:g}_u.csv"
        write_csv(res.fields["u"], path)
        artifacts.append({"path": path.name, "kind": "field-csv",
                          "gamma": res.gamma, "field": "u"})
        summary.append(f"{res.gamma:.6e},{res.osc_index:.6e},{res.control_max:.6e}")
        print(
            f"gamma={res.gamma:g}: oscillation index {res.osc_index:.4f}, "
            f"max|u| {res.control_max:.4f}"
        )
    (outdir / "sweep_summary.csv").write_text("\n".join(summary) + "\n")
    artifacts.append({"path": "sweep_summary.csv", "kind": "sweep-summary-csv"})
    _write_manifest(
        outdir, "sweep",
        {"problem": args.problem, "n": args.n, "gammas": gammas,
         "alpha": problem.alpha},
        artifacts,
    )
    return 0


def cmd_audit(args) -> int:
    problem = problems.make(args.problem or "ex2", alpha=args.alpha)
    n = args.n or 40
    cfg = _solve_config(args)
    outdir = _outdir(args)
    lines = []
    csv_lines = ["audit,detail,value"]

    for a, b in study.EQUIVALENCE_PAIRS:
        audit = study.equivalence_audit(a, b, problem, n, config=cfg)
        lines.append(
            f"equivalence {a} vs {b}: |dz|={audit.dz:.2e} |du|={audit.du:.2e} "
            f"|p - alpha*u|={audit.adjoint_gap:.2e}"
        )
        csv_lines.append(f"equivalence,{a}|{b}|dz,{audit.dz:.6e}")
        csv_lines.append(f"equivalence,{a}|{b}|du,{audit.du:.6e}")
        csv_lines.append(f"equivalence,{a}|{b}|adjoint_gap,{audit.adjoint_gap:.6e}")

    for alpha in (0.1, 1.0, 10.0):
        for ns in (4, 8, 16):
            sa = study.stability_audit(alpha, ns)
            ok = sa.sigma_min >= sa.bound - 1e-10
            lines.append(
                f"stability alpha={alpha} n={ns}: sigma_min={sa.sigma_min:.6f} "
                f"bound={sa.bound:.6f} [{'ok' if ok else 'VIOLATED'}]"
            )
            csv_lines.append(f"stability,alpha{alpha}_n{ns},{sa.sigma_min:.6e}")

    ratios = study.lemma1_ratios()
    for op_name, per_n in ratios.items():
        ns_sorted = sorted(per_n)
        growth = per_n[ns_sorted[-1]] / per_n[ns_sorted[0]]
        lines.append(f"embedding ratio ({op_name}): growth {growth:.3f} across n={ns_sorted}")
        csv_lines.append(f"embedding,{op_name}_growth,{growth:.6e}")

    if problem.has_exact:
        tr = study.truncation_audit(problem, [20, 40, 80])
        for key in ("F", "G", "H", "S"):
            orders = tr.orders[key]
            lines.append(f"truncation {key}: orders {[f'{o:.2f}' for o in orders]}")
            for k, o in enumerate(orders):
                csv_lines.append(f"truncation,{key}_order{k},{o:.6e}")

    text = "\n".join(lines)
    print(text)
    (outdir / "audit.md").write_text(text + "\n")
    (outdir / "audit.csv").write_text("\n".join(csv_lines) + "\n")
    _write_manifest(
        outdir, "audit",
        {"problem": problem.name, "n": n, "alpha": problem.alpha},
        [{"path": "audit.md", "kind": "audit-markdown"},
         {"path": "audit.csv", "kind": "audit-csv"}],
    )
    return 0


def cmd_identities(args) -> int:
    meshes = _parse_int_list(args.n, "mesh") if getattr(args, "n", None) else [8, 10, 16]
    outdir = _outdir(args)
    csv_lines = ["identity,n,value,threshold,pass"]
    all_ok = True
    for n in meshes:
        grid = Grid(2, n)
        lap = operators.laplacian_5pt(grid)
        F = operators.compact_f(grid)
        R = operators.compact_r(grid)
        gamma = 1.0
        MI = operators.reg_mass("identity", gamma, grid)
        pairs = [
            ("F*R = R*F", F, R),
            ("lap*(I-g lap) = (I-g lap)*lap", lap, MI),
            ("F*(I-g lap) = (I-g lap)*F", F, MI),
            ("R*(I-g lap) = (I-g lap)*R", R, MI),
        ]
        for label, A, B in pairs:
            comm = operators.check_commute(A, B)
            scale = operators.max_abs_entry(
                operators.DiscreteOperator(grid, "prod", A.matrix @ B.matrix)
            )
            ok = comm <= 1e-12 * scale
            all_ok &= ok
            print(f"n={n:3d}  {label}: max|comm| = {comm:.3e} "
                  f"(scale {scale:.3e}) [{'ok' if ok else 'FAIL'}]")
            csv_lines.append(f"{label},{n},{comm:.6e},{1e-12 * scale:.6e},{int(ok)}")
        if n % 2 == 0:
            Q = operators.simpson_q(grid)
            QL = Q.matrix @ lap.matrix
            LQ = lap.matrix @ Q.matrix
            transpose_gap = abs(QL.T - LQ).max()
            noncommute = abs(QL - LQ).max()
            ok = transpose_gap == 0.0 and noncommute > 0.0
            all_ok &= ok
            print(f"n={n:3d}  (Q lap)^T = lap Q: gap {transpose_gap:.1e}; "
                  f"|Q lap - lap Q| = {noncommute:.3e} (> 0) [{'ok' if ok else 'FAIL'}]")
            csv_lines.append(f"(Qlap)^T=lapQ,{n},{transpose_gap:.6e},0,{int(ok)}")
        for op, label in ((lap, "lap"), (F, "F"), (R, "R"), (MI, "I-g lap")):
            gap = abs(op.matrix - op.matrix.T).max()
            ok = gap <= 1e-15
            all_ok &= ok
            print(f"n={n:3d}  symmetry {label}: max|A - A^T| = {gap:.1e} [{'ok' if ok else 'FAIL'}]")
            csv_lines.append(f"symmetry {label},{n},{gap:.6e},1e-15,{int(ok)}")
    (outdir / "identities.csv").write_text("\n".join(csv_lines) + "\n")
    _write_manifest(outdir, "identities", {"meshes": meshes},
                    [{"path": "identities.csv", "kind": "identities-csv"}])
    return 0 if all_ok else 1


_COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "identities": cmd_identities,
}


def run(args) -> int:
    return _COMMANDS[args.command](args)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        code = run(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return code


if __name__ == "__main__":
    sys.exit(main())
