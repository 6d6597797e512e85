"""Phase-portrait data: boundary curves, special points and sample orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvature import CURVE_IDS, curve_roots
from .equilibria import DegenerateSpaceError, NoRootError, classify_equilibrium, q_point, singular_points, special_points
from .integrator import IntegrationOptions, integrate_w
from .space import PhasePoint, SpaceParams

VIEWBOX = 1000
KAHLER_A = 1.0 / 6.0


@dataclass(frozen=True)
class PortraitSpec:
    window: tuple[float, float, float, float] = (0.1, 10.0, 0.1, 10.0)  # w1 lo, hi, w2 lo, hi
    density: int = 400
    seeds: tuple[int, int] = (5, 5)
    t_max: float = 20.0
    mode: str = "w"  # or "simplex"

    def __post_init__(self):
        lo1, hi1, lo2, hi2 = self.window
        if not (0 < lo1 < hi1 and 0 < lo2 < hi2):
            raise ValueError(f"empty or non-positive window {self.window}")
        if self.mode not in ("w", "simplex"):
            raise ValueError("mode must be 'w' or 'simplex'")
        if self.density < 2:
            raise ValueError("density must be at least 2")

    def contains(self, w1: float, w2: float) -> bool:
        lo1, hi1, lo2, hi2 = self.window
        return lo1 <= w1 <= hi1 and lo2 <= w2 <= hi2


def to_simplex(w1: float, w2: float) -> tuple[float, float, float]:
    """Representative of the homothety class with ``x1 + x2 + x3 = 1``."""
    x = (1.0 / w1, 1.0 / w2, 1.0)
    s = sum(x)
    return tuple(v / s for v in x)


def _split_runs(points: list[tuple[float, float]], ok: list[bool]) -> list[list[tuple[float, float]]]:
    runs, cur = [], []
    for p, keep in zip(points, ok):
        if keep:
            cur.append(p)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return [r for r in runs if len(r) >= 2]


def _trace(xs, roots_at, jump: float = 0.5) -> list[list[tuple[float, float]]]:
    """Link the roots at consecutive abscissae into polylines.

    A root continues the open polyline whose last ordinate is nearest in log
    scale, if closer than ``jump``; anything else starts a new polyline.
    """
    done, live = [], []
    for x in xs:
        nxt = []
        free = list(roots_at(x))
        for line in live:
            if not free:
                done.append(line)
                continue
            last = line[-1][1]
            k = min(range(len(free)), key=lambda i: abs(math.log(free[i] / last)))
            if abs(math.log(free[k] / last)) < jump:
                line.append((x, free.pop(k)))
                nxt.append(line)
            else:
                done.append(line)
        nxt.extend([(x, z)] for z in free)
        live = nxt
    return done + live


# image of each curve under the swap (w1, w2) -> (w2, w1)
MIRROR = {
    "c1": "c2", "c2": "c1", "c3": "c3",
    "s1": "s2", "s2": "s1", "s3": "s3",
    "r1": "r2", "r2": "r1", "r3": "r3",
    "omega": "lambda", "lambda": "omega",
    "scalar": "scalar", "kahler": "kahler",
}


def _traced(space: SpaceParams, curve_id: str, window, density: int) -> list[list[tuple[float, float]]]:
    lo1, hi1, lo2, hi2 = window
    if curve_id == "c2":
        return [[(1.0, float(y)) for y in np.geomspace(lo2, hi2, density)]] if lo1 <= 1.0 <= hi1 else []
    xs = [float(x) for x in np.geomspace(lo1, hi1, density)]
    return _trace(xs, lambda x: curve_roots(space, curve_id, x))


def curve_polylines(space: SpaceParams, curve_id: str, spec: PortraitSpec) -> list[list[tuple[float, float]]]:
    """Every branch of a curve inside the window, as polylines in ``w``.

    Curves are traced as graphs over ``w1`` and, through the mirror curve, as
    graphs over ``w2``, so steep pieces are resolved too.
    """
    lo1, hi1, lo2, hi2 = spec.window
    lines = _traced(space, curve_id, spec.window, spec.density)
    mirrored = _traced(space, MIRROR[curve_id], (lo2, hi2, lo1, hi1), spec.density)
    lines += [[(v, u) for u, v in line] for line in mirrored]
    out = []
    for line in lines:
        for run in _split_runs(line, [spec.contains(u, v) for u, v in line]):
            if run not in out:
                out.append(run)
    return out


def _orbit(space: SpaceParams, p: PhasePoint, spec: PortraitSpec) -> list[list[tuple[float, float]]]:
    tr = integrate_w(space, p, IntegrationOptions(t_max=spec.t_max, rel_tol=1e-8, abs_tol=1e-10))
    _, ys = tr.dense(4)
    pts = [(float(u), float(v)) for u, v in ys]
    return _split_runs(pts, [spec.contains(u, v) for u, v in pts])


def build_portrait(space: SpaceParams, spec: PortraitSpec | None = None) -> dict:
    spec = spec or PortraitSpec()
    curves = {cid: curve_polylines(space, cid, spec) for cid in CURVE_IDS}
    if math.isclose(space.a, KAHLER_A, rel_tol=0, abs_tol=1e-12):
        curves["kahler"] = curve_polylines(space, "kahler", spec)

    warnings = []
    try:
        eq = [
            {"name": f"E{k}", "point": p.as_tuple(), "classification": str(classify_equilibrium(space, p).classification)}
            for k, p in enumerate(singular_points(space))
        ]
    except DegenerateSpaceError as exc:
        eq = [{"name": "E0", "point": (1.0, 1.0), "classification": "Degenerate"}]
        warnings.append(str(exc))
    specials = [{"name": f"P{k + 1}", "point": p.as_tuple()} for k, p in enumerate(special_points(space))]
    try:
        rep = q_point(space)
        q = {"t_star": rep.t_star, "point": rep.q_point.as_tuple(), "roots": list(rep.roots)}
    except NoRootError as exc:
        q = None
        warnings.append(str(exc))

    lo1, hi1, lo2, hi2 = spec.window
    n1, n2 = spec.seeds
    seeds = [
        PhasePoint(float(u), float(v))
        for u in np.geomspace(lo1, hi1, n1 + 2)[1:-1]
        for v in np.geomspace(lo2, hi2, n2 + 2)[1:-1]
    ]
    orbits = [{"seed": s.as_tuple(), "segments": _orbit(space, s, spec)} for s in seeds]

    bundle = {
        "mode": spec.mode,
        "window": list(spec.window),
        "curves": curves,
        "equilibria": eq,
        "special_points": specials,
        "q_point": q,
        "trajectories": orbits,
        "warnings": warnings,
    }
    if spec.mode == "simplex":
        bundle = _map_simplex(bundle)
    return bundle


def _map_simplex(bundle: dict) -> dict:
    def line(pts):
        return [to_simplex(*p) for p in pts]

    out = dict(bundle)
    out["curves"] = {k: [line(r) for r in runs] for k, runs in bundle["curves"].items()}
    out["equilibria"] = [{**e, "point": to_simplex(*e["point"])} for e in bundle["equilibria"]]
    out["special_points"] = [{**e, "point": to_simplex(*e["point"])} for e in bundle["special_points"]]
    if bundle["q_point"] is not None:
        out["q_point"] = {**bundle["q_point"], "point": to_simplex(*bundle["q_point"]["point"])}
    out["trajectories"] = [
        {"seed": to_simplex(*t["seed"]), "segments": [line(r) for r in t["segments"]]} for t in bundle["trajectories"]
    ]
    return out


# --- SVG ---------------------------------------------------------------------

# keyed by curve family: c, s, r curves, omega, lambda, kahler, scalar
_COLOURS = {"c": "#888888", "s": "#1f77b4", "r": "#d62728", "o": "#2ca02c", "l": "#9467bd", "k": "#ff7f0e", "x": "#8c564b"}


def _projector(bundle: dict):
    pad = 40
    span = VIEWBOX - 2 * pad
    if bundle["mode"] == "simplex":
        # triangle with x3 at the top
        def proj(p):
            x1, x2, x3 = p
            u = x2 + 0.5 * x3
            v = x3 * math.sqrt(3) / 2
            return pad + span * u, VIEWBOX - pad - span * v / (math.sqrt(3) / 2)

        return proj
    lo1, hi1, lo2, hi2 = bundle["window"]

    def proj(p):
        u = (math.log(p[0]) - math.log(lo1)) / (math.log(hi1) - math.log(lo1))
        v = (math.log(p[1]) - math.log(lo2)) / (math.log(hi2) - math.log(lo2))
        return pad + span * u, VIEWBOX - pad - span * v

    return proj


def _path(pts, proj) -> str:
    coords = [proj(p) for p in pts]
    return "M" + " L".join(f"{x:.2f},{y:.2f}" for x, y in coords)


def render_svg(bundle: dict) -> str:
    """Single-file SVG with a fixed 1000x1000 viewBox (log axes in ``w`` mode)."""
    proj = _projector(bundle)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEWBOX} {VIEWBOX}" width="{VIEWBOX}" height="{VIEWBOX}">',
        f'<rect x="0" y="0" width="{VIEWBOX}" height="{VIEWBOX}" fill="white"/>',
    ]
    for t in bundle["trajectories"]:
        for seg in t["segments"]:
            out.append(f'<path d="{_path(seg, proj)}" fill="none" stroke="#cccccc" stroke-width="1"/>')
    for cid, runs in sorted(bundle["curves"].items()):
        colour = _COLOURS.get("x" if cid == "scalar" else cid[0], "#000000")
        width = 2.5 if cid == "kahler" else 1.5
        for seg in runs:
            out.append(
                f'<path d="{_path(seg, proj)}" fill="none" stroke="{colour}" stroke-width="{width}"><title>{cid}</title></path>'
            )
    marks = (
        [(e["name"], e["point"], "black") for e in bundle["equilibria"]]
        + [(e["name"], e["point"], "#d62728") for e in bundle["special_points"]]
        + ([("Q", bundle["q_point"]["point"], "#2ca02c")] if bundle["q_point"] else [])
    )
    for name, p, colour in marks:
        try:
            x, y = proj(p)
        except ValueError:
            continue
        if 0 <= x <= VIEWBOX and 0 <= y <= VIEWBOX:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{colour}"><title>{name}</title></circle>')
            out.append(f'<text x="{x + 7:.2f}" y="{y - 7:.2f}" font-size="16">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
