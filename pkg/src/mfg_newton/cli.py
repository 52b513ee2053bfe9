"""Command-line harness for runs, studies, comparisons, and property checks.

Exit codes: 0 on success, 2 on configuration or validation errors, 3 on
solver failures (including runs that finish in a non-converged status).
Settings come from an optional YAML file plus flags; a flag given on the
command line overrides the file value of the same name.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import yaml

from .linear_solver import SolverError
from .newton_driver import solve
from .props import run_props
from .runio import RunConfig, write_run
from .study import compare_schemes, convergence_study


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with run settings")
    p.add_argument("--problem", help="builtin problem id")
    p.add_argument("--scheme", choices=["sl", "fd"])
    p.add_argument("--n-space", type=int, dest="n_space")
    p.add_argument("--dt", type=float, help="explicit time step (otherwise policy rule)")
    p.add_argument("--out", dest="out_dir", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--normalize-m0", action=argparse.BooleanOptionalAction, dest="normalize_m0")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-newton-iters", type=int, dest="max_newton_iters")
    p.add_argument("--globalization", choices=["off", "on_fallback", "always"])
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--gs-delta", type=float, dest="gs_delta")
    p.add_argument("--dt-policy", choices=["sl", "fd"], dest="dt_policy")
    p.add_argument("--breakdown-tol", type=float, dest="breakdown_tol")
    p.add_argument("--breakdown-frac", type=float, dest="breakdown_frac")
    p.add_argument("--init", choices=["broadcast", "zero_u", "uniform_m"])
    p.add_argument("--z-form", choices=["divergence", "product_rule"], dest="z_form")
    p.add_argument("--stencil", choices=["compact", "composed"])
    p.add_argument("--drift-eps-factor", type=float, dest="drift_eps_factor")
    p.add_argument("--cache-limit-mb", type=float, dest="cache_limit_mb")
    p.add_argument("--max-sweeps", type=int, dest="max_sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfg-newton",
        description="Newton solvers for mean field games on the periodic torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="solve one configuration and write artifacts")
    _add_run_flags(run_p)

    study_p = sub.add_parser("study", help="self-convergence table over resolutions")
    study_p.add_argument("--problem", required=True)
    study_p.add_argument("--scheme", choices=["sl", "fd"], default="sl")
    study_p.add_argument(
        "--n-list",
        required=True,
        help="comma-separated increasing resolutions, e.g. 40,80,160",
    )
    study_p.add_argument(
        "--reference",
        default="finest_self",
        help="finest_self or external_file:<run dir>",
    )
    study_p.add_argument("--tolerance", type=float)
    study_p.add_argument("--out", dest="out_dir", help="output directory")

    cmp_p = sub.add_parser("compare", help="run both schemes on one problem")
    cmp_p.add_argument("--problem", required=True)
    cmp_p.add_argument("--n-space", type=int, required=True, dest="n_space")
    cmp_p.add_argument("--out", dest="out_dir", help="output directory")

    props_p = sub.add_parser("props", help="structural property battery")
    props_p.add_argument("--seed", type=int, default=0)
    return parser


def _run_mapping(args) -> dict:
    mapping = {}
    if args.config:
        loaded = yaml.safe_load(Path(args.config).read_text())
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {args.config} must hold a mapping")
        mapping.update(loaded)
    skip = {"command", "config"}
    for key, value in vars(args).items():
        if key not in skip and value is not None:
            mapping[key] = value
    return mapping


def _cmd_run(args) -> int:
    config = RunConfig.from_mapping(_run_mapping(args))
    problem = config.resolve_problem()
    grid = config.resolve_grid(problem)
    t0 = time.perf_counter()
    try:
        u, m, history = solve(problem, grid, config.newton)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0
    paths = write_run(config.out_dir, config, problem, grid, u, m, history, wall)
    print(
        f"{config.problem} {config.newton.scheme} n={grid.n_space} nt={grid.n_time}: "
        f"{history.status} in {history.iterations} iterations, {wall:.2f}s -> "
        f"{Path(paths['meta']).parent}"
    )
    if history.status != "converged":
        print(f"run finished in status {history.status}", file=sys.stderr)
        return 3
    return 0


def _cmd_study(args) -> int:
    from .runio import RunConfig as RC

    n_list = [int(tok) for tok in args.n_list.split(",") if tok]
    config = RC.from_mapping(
        {"problem": args.problem}
        | ({"tolerance": args.tolerance} if args.tolerance is not None else {})
    )
    problem = config.resolve_problem()
    try:
        table = convergence_study(
            problem,
            args.scheme,
            n_list,
            reference=args.reference,
            config=config.newton,
            problem_id=args.problem,
        )
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    for line in table.csv_lines():
        print(line)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "study.csv").write_text("\n".join(table.csv_lines()) + "\n")
        (out / "study.json").write_text(
            json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    if any(r.status != "converged" for r in table.rows):
        print("one or more study rows did not converge", file=sys.stderr)
        return 3
    return 0


def _cmd_compare(args) -> int:
    from .runio import RunConfig as RC

    config = RC.from_mapping({"problem": args.problem})
    problem = config.resolve_problem()
    try:
        report = compare_schemes(
            problem, args.n_space, config=config.newton, problem_id=args.problem
        )
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    for scheme, entry in report["schemes"].items():
        if "skipped" in entry:
            print(f"{scheme}: skipped ({entry['skipped']})")
        else:
            rate = entry["rate_fit_m"]
            rate_s = "n/a" if rate is None else f"{rate:.3f}"
            print(
                f"{scheme}: {entry['status']} in {entry['iterations']} iterations, "
                f"rate {rate_s}, breakdown_flagged={entry['breakdown_flagged']}"
            )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n"
        )
    return 0


def _cmd_props(args) -> int:
    results = run_props(args.seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 3 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "study": _cmd_study,
        "compare": _cmd_compare,
        "props": _cmd_props,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
