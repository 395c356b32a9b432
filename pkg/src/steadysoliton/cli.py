"""Command-line front end: run, shoot, sweep, compare, persist.

Every subcommand prints one summary JSON document to stdout; with
--out DIR the summary and any retained trajectory files land there
too.  The summary always embeds the invariant-check report for each
trajectory it kept, so a failed check is never silent, and it echoes
the controls actually used (tolerances, s range, series order) so a
run can be reproduced from its own output.  Domain errors leave as
one-line JSON on stderr with exit status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .asymptotics import fit_sqrt_growth, verify_decay
from .checks import run_checks
from .classify import (
    Classification,
    ClassLabel,
    SweepPoint,
    boundary_interval,
    classify,
    classify_f0,
    shoot_critical,
)
from .cone import bryant_for_dimension, conformance, detect_cone_case, \
    run_cone_case
from .errors import InvalidCase, NotCollapsed, SolitonError, WindowTooShort
from .integrator import IntegrationControls, Terminal, Trajectory, integrate
from .model import Branch, ModelParams, ShootConfig
from .pagepope import compare_oracle, pagepope_solution
from .series import build_line_bundle_jet

__all__ = ["build_parser", "main", "write_trajectory"]

_CSV_COLUMNS = ("s", "a", "da", "b", "db", "f", "df", "Q", "R", "H")


# ---------------------------------------------------------------- output

def _coerce(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, default=_coerce)


def _event_json(event) -> dict:
    st = event.state
    return {"kind": event.kind.value, "s": event.s, "Q": st.a / st.b}


def write_trajectory(trajectory: Trajectory, path: Path,
                     fmt: str = "csv") -> None:
    """Serialize the sampled profiles.

    CSV is the plotting interchange format: the header is exactly the
    column tuple above and every float carries 17 significant digits,
    so equal runs produce byte-identical files.  JSON mirrors the same
    columns and adds the event list and terminal reason.
    """
    arr = trajectory.arrays()
    cols = [arr[name] for name in _CSV_COLUMNS]
    if fmt == "csv":
        lines = [",".join(_CSV_COLUMNS)]
        lines.extend(",".join(f"{v:.17g}" for v in row)
                     for row in zip(*cols))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        doc = {"columns": {name: [float(v) for v in col]
                           for name, col in zip(_CSV_COLUMNS, cols)},
               "events": [_event_json(e) for e in trajectory.events],
               "terminal": trajectory.terminal.value}
        path.write_text(_dumps(doc) + "\n")
    else:
        raise InvalidCase(f"unknown trajectory format {fmt!r}")


def _emit(summary: dict, retained: list[tuple[str, Trajectory]],
          args: argparse.Namespace) -> None:
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, trajectory in retained:
            filename = f"{name}.{args.format}"
            write_trajectory(trajectory, out_dir / filename, args.format)
            files[name] = filename
        summary["artifacts"] = files
        (out_dir / "summary.json").write_text(_dumps(summary) + "\n")
    sys.stdout.write(_dumps(summary) + "\n")


# ------------------------------------------------------- shared plumbing

def _controls(args: argparse.Namespace) -> IntegrationControls:
    return IntegrationControls(rel_tol=args.rtol, abs_tol=args.atol,
                               s_max=args.s_max)


def _controls_json(controls: IntegrationControls, order: int) -> dict:
    return {"relTol": controls.rel_tol, "absTol": controls.abs_tol,
            "sMax": controls.s_max, "seriesOrder": order}


def _params_json(params: ModelParams) -> dict:
    doc = {"n": params.n, "branch": params.branch.value, "a1": params.a1}
    if params.branch is Branch.LINE_BUNDLE:
        doc["k"] = params.k
        doc["p"] = params.p
    return doc


def _line_bundle_params(args: argparse.Namespace) -> ModelParams:
    """Twisting integers from --k/--p, or recovered from --a1."""
    if args.a1 is not None:
        if args.k is not None or args.p is not None:
            raise InvalidCase("give either --a1 or --k/--p, not both")
        ratio = Fraction(str(args.a1)) / (args.n + 1)
        if ratio <= 0:
            raise InvalidCase(f"a1 must be positive, got {args.a1}")
        k, p = ratio.numerator, ratio.denominator
    else:
        k = args.k if args.k is not None else 1
        p = args.p if args.p is not None else 1
    return ModelParams.line_bundle(args.n, k, p)


def _tail_json(trajectory: Trajectory) -> dict | None:
    if trajectory.terminal is not Terminal.REACHED_S_MAX:
        return None
    try:
        return fit_sqrt_growth(trajectory).to_json()
    except WindowTooShort:
        return None


def _decay_json(trajectory: Trajectory) -> dict | None:
    try:
        return verify_decay(trajectory).to_json()
    except (NotCollapsed, WindowTooShort):
        return None


# ----------------------------------------------------------- subcommands

def _cmd_integrate(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    params = _line_bundle_params(args)
    cfg = ShootConfig.line_bundle(args.f0)
    controls = _controls(args)
    jet = build_line_bundle_jet(params, cfg, order=args.series_order)
    trajectory = integrate(jet, params, cfg, controls)
    cls = classify(trajectory)
    summary = {
        "subcommand": "integrate",
        "params": _params_json(params),
        "seed": {"f0": cfg.f0},
        "controls": _controls_json(controls, args.series_order),
        "terminal": trajectory.terminal.value,
        "events": [_event_json(e) for e in trajectory.events],
        "classification": cls.to_json(),
        "tailFit": _tail_json(trajectory),
        "checks": run_checks(trajectory).to_json(),
        "decay": (_decay_json(trajectory)
                  if cls.label is ClassLabel.COLLAPSED else None),
    }
    return summary, [("trajectory", trajectory)]


def _cmd_shoot(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    params = _line_bundle_params(args)
    controls = _controls(args)
    result = shoot_critical(params, controls,
                            bracket_init=(args.bracket_lo, args.bracket_hi),
                            tol_f0=args.tol_f0,
                            record_escapes=not args.no_escapes)
    critical = result.critical_trajectory
    summary = {
        "subcommand": "shoot",
        "params": _params_json(params),
        "controls": _controls_json(controls, 10),
        "shoot": result.to_json(),
        "criticalClassification": classify(critical).to_json(),
        "checks": run_checks(critical).to_json(),
    }
    return summary, [("critical", critical)]


def _sweep_point(params: ModelParams, f0: float,
                 controls: IntegrationControls
                 ) -> tuple[Classification, dict]:
    """Worker body: classify one grid value and check its trajectory."""
    cls, trajectory = classify_f0(params, f0, controls)
    return cls, run_checks(trajectory).to_json()


def _sweep_workers(points: int) -> int:
    raw = os.environ.get("SOLITON_THREADS")
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise InvalidCase(
            f"SOLITON_THREADS must be an integer, got {raw!r}") from None
    if workers < 1:
        raise InvalidCase(f"SOLITON_THREADS must be >= 1, got {workers}")
    return min(workers, points)


def _cmd_sweep(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    params = _line_bundle_params(args)
    controls = _controls(args)
    if args.points < 2:
        raise InvalidCase(f"sweep needs at least 2 points, got {args.points}")
    if not args.f0_lo < args.f0_hi <= 0.0:
        raise InvalidCase(
            f"need f0_lo < f0_hi <= 0, got [{args.f0_lo}, {args.f0_hi}]")
    grid = [float(v) for v in np.linspace(args.f0_hi, args.f0_lo,
                                          args.points)]
    workers = _sweep_workers(len(grid))
    if workers == 1:
        results = [_sweep_point(params, f0, controls) for f0 in grid]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_point, params, f0, controls)
                       for f0 in grid]
            results = [fut.result() for fut in futures]
    points = [SweepPoint(f0=f0, classification=cls)
              for f0, (cls, _) in zip(grid, results)]
    interval, findings = boundary_interval(points)
    point_docs = []
    for point, (_, report) in zip(points, results):
        failed = [c for c in report["checks"] if not c["passed"]]
        point_docs.append({**point.to_json(),
                           "allChecksPassed": report["allPassed"],
                           "failedChecks": failed})
    summary = {
        "subcommand": "sweep",
        "params": _params_json(params),
        "controls": _controls_json(controls, 10),
        "workers": workers,
        "points": point_docs,
        "boundary": {
            "interval": list(interval) if interval is not None else None,
            "findings": findings,
        },
    }
    return summary, []


def _cmd_oracle(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    params = _line_bundle_params(args)
    cfg = ShootConfig.line_bundle(0.0)
    controls = _controls(args)
    jet = build_line_bundle_jet(params, cfg, order=args.series_order)
    trajectory = integrate(jet, params, cfg, controls)
    sol = pagepope_solution(int(params.n), params.a1)
    report = compare_oracle(trajectory, sol, q_cap=args.q_cap)
    summary = {
        "subcommand": "oracle",
        "params": _params_json(params),
        "controls": _controls_json(controls, args.series_order),
        "terminal": trajectory.terminal.value,
        "oracle": {"L": sol.L, "rB": sol.r_b, "qCap": args.q_cap,
                   **report.to_json()},
        "checks": run_checks(trajectory).to_json(),
    }
    return summary, [("trajectory", trajectory)]


def _cmd_cone(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    controls = _controls(args)
    case, trajectory, fit = run_cone_case(args.n, args.a0, args.b0,
                                          controls, order=args.series_order)
    summary = {
        "subcommand": "cone",
        "case": case.to_json(),
        "params": _params_json(trajectory.params),
        "controls": _controls_json(controls, args.series_order),
        "terminal": trajectory.terminal.value,
        "tailFit": fit.to_json(),
        "conformance": [c.to_json() for c in conformance(case, trajectory,
                                                         fit)],
        "checks": run_checks(trajectory).to_json(),
    }
    return summary, [("trajectory", trajectory)]


def _cmd_bryant(args) -> tuple[dict, list[tuple[str, Trajectory]]]:
    controls = _controls(args)
    trajectory, fit = bryant_for_dimension(args.d, a0=args.a0,
                                           controls=controls)
    case = detect_cone_case(trajectory.params.n, args.a0, args.a0)
    summary = {
        "subcommand": "bryant",
        "dimension": args.d,
        "case": case.to_json(),
        "params": _params_json(trajectory.params),
        "controls": _controls_json(controls, 10),
        "terminal": trajectory.terminal.value,
        "tailFit": fit.to_json(),
        "conformance": [c.to_json() for c in conformance(case, trajectory,
                                                         fit)],
        "checks": run_checks(trajectory).to_json(),
    }
    return summary, [("trajectory", trajectory)]


_RUNNERS = {
    "integrate": _cmd_integrate,
    "shoot": _cmd_shoot,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "cone": _cmd_cone,
    "bryant": _cmd_bryant,
}


# ---------------------------------------------------------------- parser

def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, metavar="DIR",
                   help="directory for summary.json and trajectory files "
                        "(default: summary to stdout only)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="trajectory file format (default csv)")


def _add_controls(p: argparse.ArgumentParser, order: bool = True) -> None:
    p.add_argument("--s-max", type=float, default=60.0,
                   help="integration endpoint (default 60)")
    p.add_argument("--rtol", type=float, default=1e-10,
                   help="relative step tolerance (default 1e-10)")
    p.add_argument("--atol", type=float, default=1e-10,
                   help="absolute step tolerance (default 1e-10)")
    if order:
        p.add_argument("--series-order", type=int, default=10,
                       help="origin series truncation order (default 10)")


def _add_line_bundle(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=1,
                   help="half the base sphere dimension (default 1)")
    p.add_argument("--k", type=int, default=None,
                   help="twisting numerator (default 1)")
    p.add_argument("--p", type=int, default=None,
                   help="twisting denominator (default 1)")
    p.add_argument("--a1", type=float, default=None,
                   help="boundary slope (n+1)k/p; alternative to --k/--p")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soliton",
        description="Steady soliton profile runs, classification, "
                    "shooting, and oracle comparisons.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("integrate",
                       help="one line-bundle run, classified and checked")
    _add_line_bundle(p)
    p.add_argument("--f0", type=float, required=True,
                   help="second potential derivative at the origin (<= 0)")
    _add_controls(p)
    _add_output(p)

    p = sub.add_parser("shoot",
                       help="bisect f0 for the critical trajectory")
    _add_line_bundle(p)
    p.add_argument("--bracket-lo", type=float, default=-10.0,
                   help="initial collapsed endpoint (default -10)")
    p.add_argument("--bracket-hi", type=float, default=0.0,
                   help="initial crossing endpoint (default 0)")
    p.add_argument("--tol-f0", type=float, default=1e-10,
                   help="bracket width target (default 1e-10)")
    p.add_argument("--no-escapes", action="store_true",
                   help="skip the band-shadowing escape records")
    _add_controls(p, order=False)
    _add_output(p)

    p = sub.add_parser("sweep",
                       help="classify a descending grid of f0 values")
    _add_line_bundle(p)
    p.add_argument("--f0-lo", type=float, default=-10.0,
                   help="most negative grid value (default -10)")
    p.add_argument("--f0-hi", type=float, default=0.0,
                   help="least negative grid value (default 0)")
    p.add_argument("--points", type=int, default=21,
                   help="grid size (default 21); SOLITON_THREADS bounds "
                        "worker fan-out")
    _add_controls(p, order=False)
    _add_output(p)

    p = sub.add_parser("oracle",
                       help="compare the f0 = 0 run to the closed form")
    _add_line_bundle(p)
    p.add_argument("--q-cap", type=float, default=1.5,
                   help="compare samples up to this shape ratio "
                        "(default 1.5)")
    _add_controls(p)
    _add_output(p)

    p = sub.add_parser("cone", help="one cone-branch run with case checks")
    p.add_argument("--n", type=float, default=1.0,
                   help="half the sphere dimension; half-integers allowed "
                        "(default 1)")
    p.add_argument("--a0", type=float, required=True,
                   help="third derivative a'''(0)")
    p.add_argument("--b0", type=float, required=True,
                   help="third derivative b'''(0)")
    _add_controls(p)
    _add_output(p)

    p = sub.add_parser("bryant",
                       help="rotationally symmetric run in dimension d")
    p.add_argument("--d", type=int, required=True,
                   help="total dimension 2n + 2 (integer >= 3)")
    p.add_argument("--a0", type=float, default=-1.0,
                   help="diagonal seed a'''(0) = b'''(0) < 0 (default -1)")
    _add_controls(p, order=False)
    _add_output(p)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary, retained = _RUNNERS[args.subcommand](args)
        _emit(summary, retained, args)
    except SolitonError as err:
        sys.stderr.write(json.dumps(err.payload()) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
