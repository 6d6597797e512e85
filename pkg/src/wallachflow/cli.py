"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 integration failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .curvature import REGION_CURVES, boundary_residuals, classify_metric, kahler_residual
from .equilibria import DegenerateSpaceError, NoRootError, equilibria, q_point, special_points
from .fields import x2_system
from .integrator import (
    MAX_STEPS,
    STEP_FLOOR,
    X_BOUNDS,
    Event,
    IntegrationError,
    IntegrationOptions,
    integrate,
    integrate_w,
    integrate_x,
    region_events,
    scaled_region_residual,
)
from .portrait import PortraitSpec, build_portrait, render_svg
from .serialize import dumps, envelope, trajectory_csv
from .space import (
    Metric3,
    PhasePoint,
    SpaceParamsError,
    from_scale_invariant,
    make_space,
    parse_number,
    to_scale_invariant,
)
from .sweep import CONSTRAINTS, SweepSpec, run_sweep

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTEGRATION = 3
EXIT_VERIFY = 4

KAHLER_TOL = 1e-12
X2_BOUNDS = (1e-8, 1e4)


class InputError(ValueError):
    pass


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(parse_number(v) for v in text.split(","))
    except SpaceParamsError as exc:
        raise InputError(str(exc)) from exc
    if n is not None and len(vals) != n:
        raise InputError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _space(args):
    return make_space(args.a, args.d)


def _opts(args, **extra) -> IntegrationOptions:
    return IntegrationOptions(rel_tol=args.rtol, abs_tol=args.atol, t_max=args.tmax, **extra)


def _emit(args, text: str, suffix: str = "") -> None:
    if args.out:
        path = Path(str(args.out) + suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


# --- classify ----------------------------------------------------------------


def cmd_classify(args) -> int:
    space = _space(args)
    if (args.w is None) == (args.x is None):
        raise InputError("give exactly one of --w or --x")
    if args.w is not None:
        p = PhasePoint(*_floats(args.w, 2))
        m = from_scale_invariant(p)
    else:
        m = Metric3(*_floats(args.x, 3))
        p = to_scale_invariant(m)
    sig = classify_metric(space, m)
    kres = kahler_residual(p)
    payload = {
        "point": {"x": m.as_tuple(), "w": p.as_tuple()},
        "signature": sig,
        "residuals": boundary_residuals(space, p),
        "kahler_residual": kres,
        "kahler": abs(kres) <= KAHLER_TOL,
    }
    _emit(args, dumps(envelope(space, payload)))
    return EXIT_OK


# --- integrate ---------------------------------------------------------------


def _w_of(system: str):
    if system == "w":
        return lambda y: PhasePoint(y[0], y[1])
    if system == "x3":
        return lambda y: PhasePoint(y[2] / y[0], y[2] / y[1])
    # reduced system on x1 x2 x3 = 1
    return lambda y: PhasePoint(1.0 / (y[0] * y[0] * y[1]), 1.0 / (y[0] * y[1] * y[1]))


def _events(space, system: str, region: str | None) -> list[Event]:
    if region is None:
        return []
    if system == "w":
        return region_events(space, region)
    to_w = _w_of(system)
    out = []
    for i, name in enumerate(REGION_CURVES[region]):
        def fn(y, i=i):
            return scaled_region_residual(space, region, i, to_w(y))

        out.append(Event(name, fn))
    return out


def cmd_integrate(args) -> int:
    space = _space(args)
    system = args.system
    start = _floats(args.start)
    dims = {"w": 2, "x3": 3, "x2": 2}[system]
    if len(start) != dims:
        raise InputError(f"system {system} needs {dims} start coordinates")
    if not all(v > 0 for v in start):
        raise InputError(f"start coordinates must be positive: {start}")
    region = None if args.events == "none" else args.events
    events = _events(space, system, region)
    try:
        if system == "w":
            tr = integrate_w(space, start, _opts(args), events)
        elif system == "x3":
            tr = integrate_x(space, start, _opts(args, state_bounds=X_BOUNDS), events)
        else:
            # x1, x2 <= 1e4 keeps the implicit x3 = 1/(x1 x2) above 1e-8
            tr = integrate(x2_system(space), start, _opts(args, state_bounds=X2_BOUNDS), events, log_state=True)
    except (IntegrationError, ValueError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION

    columns = {"w": ("w1", "w2"), "x3": ("x1", "x2", "x3"), "x2": ("x1", "x2")}[system]
    log = {
        "system": system,
        "start": start,
        "reason": tr.reason,
        "detail": tr.detail,
        "t_final": tr.t_final,
        "final": tr.final,
        "n_accepted": tr.n_accepted,
        "n_rejected": tr.n_rejected,
        "events": [
            {"name": e.name, "t": e.t, "state": e.y, "direction": e.direction, "value": e.value} for e in tr.events
        ],
    }
    if system == "x3":
        log["max_volume_deviation"] = float(np.max(np.abs(np.prod(tr.y, axis=1) - 1.0)))
    if system == "w" and args.kahler_check:
        log["max_kahler_residual"] = max(abs(kahler_residual(PhasePoint(*map(float, y)))) for y in tr.dense(8)[1])

    if args.format == "csv" or args.out:
        csv_text = trajectory_csv(tr.t, tr.y, columns)
    if args.out:
        _emit(args, csv_text, ".csv")
        _emit(args, dumps(envelope(space, log)), ".events.json")
        sys.stdout.write(dumps(envelope(space, {k: log[k] for k in log if k != "events"})))
    elif args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(dumps(envelope(space, log)))
    if tr.reason in (STEP_FLOOR, MAX_STEPS):
        print(f"integration stopped early: {tr.reason} {tr.detail}", file=sys.stderr)
        return EXIT_INTEGRATION
    return EXIT_OK


# --- sweep -------------------------------------------------------------------


def _grid(text: str) -> tuple[int, int]:
    try:
        n1, n2 = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise InputError(f"grid must look like 10x10, got {text!r}") from exc
    if n1 < 1 or n2 < 1:
        raise InputError("grid counts must be positive")
    return n1, n2


def cmd_sweep(args) -> int:
    space = _space(args)
    spec = SweepSpec(
        space,
        args.region,
        _grid(args.grid),
        margin=args.margin,
        horizon=args.tmax,
        rel_tol=args.rtol,
        abs_tol=args.atol,
        constraint=args.constraint,
        w1_range=None if args.w1_range is None else _floats(args.w1_range, 2),
    )
    res = run_sweep(spec, jobs=args.jobs)
    payload = {
        "region": spec.region,
        "counts": spec.counts,
        "margin": spec.margin,
        "horizon": spec.horizon,
        "constraint": spec.constraint,
        "records": res.records,
        "summary": res.summary,
    }
    _emit(args, dumps(envelope(space, payload)))
    return EXIT_OK


# --- equilibria --------------------------------------------------------------


def cmd_equilibria(args) -> int:
    space = _space(args)
    payload: dict = {"warnings": []}
    try:
        payload["equilibria"] = [
            {"name": f"E{k}", **{f: getattr(r, f) for f in ("location", "eigenvalues", "classification", "einstein_metric")}}
            for k, r in enumerate(equilibria(space))
        ]
    except DegenerateSpaceError as exc:
        payload["equilibria"] = []
        payload["warnings"].append(f"degenerate: {exc}")
    payload["special_points"] = special_points(space)
    try:
        rep = q_point(space)
        payload["q_point"] = {"t_star": rep.t_star, "point": rep.q_point, "residual": rep.residual, "roots": rep.roots}
    except NoRootError as exc:
        payload["q_point"] = None
        payload["warnings"].append(str(exc))
    _emit(args, dumps(envelope(space, payload)))
    return EXIT_OK


# --- portrait ----------------------------------------------------------------


def cmd_portrait(args) -> int:
    space = _space(args)
    try:
        spec = PortraitSpec(window=_floats(args.window, 4), density=args.density, mode=args.mode, t_max=args.tmax)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    bundle = build_portrait(space, spec)
    if args.format == "svg":
        _emit(args, render_svg(bundle))
    else:
        _emit(args, dumps(envelope(space, bundle)))
        if args.svg:
            Path(args.svg).write_text(render_svg(bundle))
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    results = checks.run_checks(args.level, jobs=args.jobs)
    for r in results:
        print(r.line, file=sys.stderr)
    payload = {
        "level": args.level,
        "passed": all(r.passed for r in results),
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "failures": r.failures, "details": r.details}
            for r in results
        ],
    }
    _emit(args, dumps(envelope(None, payload)))
    return EXIT_OK if payload["passed"] else EXIT_VERIFY


# --- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, tmax: float = 100.0) -> None:
    p.add_argument("--a", default="1/8", help="space parameter, e.g. 1/8 or 0.3")
    p.add_argument("--d", type=int, default=1, help="module dimension")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--tmax", type=float, default=tmax)
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file with option defaults")


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    """``defaults`` maps a subcommand name to option defaults, e.g. from ``--config``."""
    parser = argparse.ArgumentParser(prog="wallachflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="curvature signatures of one metric")
    _common(p)
    p.add_argument("--w", default=None, help="w1,w2")
    p.add_argument("--x", default=None, help="x1,x2,x3")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("integrate", help="integrate one trajectory")
    _common(p)
    p.add_argument("--system", choices=["w", "x3", "x2"], default="w")
    p.add_argument("--start", required=True)
    p.add_argument("--events", choices=["none", "D", "R", "S"], default="none")
    p.add_argument("--kahler-check", action="store_true", help="report the Kahler curve residual (w system)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("sweep", help="exit statistics over a grid of starts")
    _common(p)
    p.add_argument("--region", choices=["D", "R", "S"], required=True)
    p.add_argument("--grid", default="10x10")
    p.add_argument("--margin", type=float, default=1e-2)
    p.add_argument("--constraint", choices=sorted(CONSTRAINTS), default=None)
    p.add_argument("--w1-range", default=None, help="lo,hi")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("equilibria", help="equilibria, special points and the Q-point")
    _common(p)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("portrait", help="phase-portrait bundle")
    _common(p, tmax=20.0)
    p.add_argument("--window", default="0.1,10,0.1,10", help="w1lo,w1hi,w2lo,w2hi")
    p.add_argument("--density", type=int, default=400)
    p.add_argument("--mode", choices=["w", "simplex"], default="w")
    p.add_argument("--format", choices=["json", "svg"], default="json")
    p.add_argument("--svg", default=None, help="also write an SVG rendering here")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("verify", help="run the acceptance checks")
    _common(p)
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_verify)

    for name, p in sub.choices.items():
        if defaults and name in defaults:
            p.set_defaults(**defaults[name])
    return parser


def _parse(argv: list[str]) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = set(cfg) - set(vars(args)) | ({"func", "command", "config"} & set(cfg))
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    # config values act as defaults; explicit flags still win
    return build_parser({args.command: cfg}).parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        return args.func(args)
    except (InputError, SpaceParamsError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # invalid metrics, points off a curve, ...
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
