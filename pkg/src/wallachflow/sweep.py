"""Grid sweeps: exit and no-return statistics over many starts in a region."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curvature import Sign, in_region, ricci_signature
from .integrator import IntegrationOptions, track_region
from .space import PhasePoint, SpaceParams, from_scale_invariant, in_omega

DEFAULT_MARGIN = 1e-2
_W2_SCAN_CAP = 1e4


def below_kahler(p: PhasePoint) -> bool:
    """``w2 < w1 / (w1 - 1)``, the side of the Kähler curve containing ``E0``."""
    return p.w1 <= 1.0 or p.w2 < p.w1 / (p.w1 - 1.0)


# named so that specs stay picklable for worker processes
CONSTRAINTS = {"below_kahler": below_kahler}


def c_distance(p: PhasePoint) -> float:
    """Euclidean distance to the lines ``c1: w2 = 1``, ``c2: w1 = 1``, ``c3: w1 = w2``."""
    return min(abs(p.w2 - 1.0), abs(p.w1 - 1.0), abs(p.w2 - p.w1) / math.sqrt(2.0))


@dataclass(frozen=True)
class SweepSpec:
    space: SpaceParams
    region: str
    counts: tuple[int, int] = (10, 10)
    margin: float = DEFAULT_MARGIN
    horizon: float = 100.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    constraint: str | None = None
    # optional w1 extent; inferred from the region when None
    w1_range: tuple[float, float] | None = None

    def admissible(self, p: PhasePoint) -> bool:
        if not in_omega(p) or c_distance(p) < self.margin:
            return False
        if self.constraint is not None and not CONSTRAINTS[self.constraint](p):
            return False
        return in_region(self.space, self.region, p)

    @property
    def options(self) -> IntegrationOptions:
        return IntegrationOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol, t_max=self.horizon)


def _column(spec: SweepSpec, w1: float, n_scan: int = 1500) -> tuple[float, float] | None:
    """First run of admissible ``w2`` above the diagonal at abscissa ``w1``."""
    w2s = np.geomspace(w1 + spec.margin * math.sqrt(2.0), _W2_SCAN_CAP, n_scan)
    lo = hi = None
    for w2 in w2s:
        ok = spec.admissible(PhasePoint(w1, float(w2)))
        if ok and lo is None:
            lo = float(w2)
        if ok:
            hi = float(w2)
        elif lo is not None:
            break
    if lo is None or hi <= lo:
        return None
    return lo, hi


def _w1_extent(spec: SweepSpec, n_scan: int = 200) -> tuple[float, float]:
    if spec.w1_range is not None:
        return spec.w1_range
    top = 1.0 / spec.space.a + 1.0
    w1s = np.linspace(1.0 + spec.margin, top, n_scan)
    alive = [float(w1) for w1 in w1s if _column(spec, float(w1), 300) is not None]
    if not alive:
        raise ValueError(f"region {spec.region} has no admissible points in the domain")
    return alive[0], alive[-1]


def grid_points(spec: SweepSpec) -> list[PhasePoint]:
    """``counts[0]`` columns in ``w1``, ``counts[1]`` interior rows per column.

    Rows split each column's admissible ``w2`` interval evenly, so the grid
    follows the region's shape. Points failing :meth:`SweepSpec.admissible`
    are dropped.
    """
    n1, n2 = spec.counts
    lo1, hi1 = _w1_extent(spec)
    points = []
    for i in range(n1):
        w1 = lo1 + (hi1 - lo1) * (i + 1) / (n1 + 1)
        col = _column(spec, w1)
        if col is None:
            continue
        lo2, hi2 = col
        for j in range(n2):
            p = PhasePoint(w1, lo2 + (hi2 - lo2) * (j + 1) / (n2 + 1))
            if spec.admissible(p):
                points.append(p)
    return points


@dataclass(frozen=True)
class SweepRecord:
    index: int
    start: PhasePoint
    exited: bool
    exit_time: float | None
    exit_curve: str | None
    reentered: bool
    end_reason: str
    end_time: float
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[SweepRecord]
    summary: dict = field(default_factory=dict)


def run_start(spec: SweepSpec, index: int, start: PhasePoint) -> SweepRecord:
    try:
        hist = track_region(spec.space, start, spec.region, spec.options)
    except Exception as exc:  # recorded per start, not fatal
        return SweepRecord(index, start, False, None, None, False, "error", math.nan, repr(exc))
    ex = hist.first_exit
    traj = hist.trajectory
    return SweepRecord(
        index=index,
        start=start,
        exited=ex is not None,
        exit_time=None if ex is None else float(ex.t),
        exit_curve=None if ex is None else ex.name,
        reentered=hist.reentered,
        end_reason=traj.reason,
        end_time=traj.t_final,
    )


def _run_packed(args):
    return run_start(*args)


def summarize(records: list[SweepRecord]) -> dict:
    n = len(records)
    exited = sum(r.exited for r in records)
    times = [r.exit_time for r in records if r.exit_time is not None]
    curves: dict[str, int] = {}
    for r in records:
        if r.exit_curve:
            curves[r.exit_curve] = curves.get(r.exit_curve, 0) + 1
    return {
        "n_starts": n,
        "n_exited": exited,
        "exit_fraction": exited / n if n else math.nan,
        "n_reentered": sum(r.reentered for r in records),
        "n_errors": sum(r.error is not None for r in records),
        "exit_curves": dict(sorted(curves.items())),
        "max_exit_time": max(times) if times else None,
    }


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, jobs: int | None = None, points: list[PhasePoint] | None = None) -> SweepResult:
    points = grid_points(spec) if points is None else points
    jobs = default_jobs() if jobs is None else jobs
    work = [(spec, i, p) for i, p in enumerate(points)]
    if jobs <= 1 or len(work) <= 1:
        records = [run_start(*w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_packed, work, chunksize=max(1, len(work) // (4 * jobs))))
    records.sort(key=lambda r: r.index)
    return SweepResult(spec, records, summarize(records))


# --- invariance of positive Ricci curvature ---------------------------------


@dataclass(frozen=True)
class RicciRetention:
    start: PhasePoint
    entered: bool
    first_positive_time: float | None
    retained: bool
    n_samples: int
    end_reason: str


def ricci_retention(space: SpaceParams, start: PhasePoint, opts: IntegrationOptions) -> RicciRetention:
    """Whether ``ricci = Positive`` holds at every sample after it first holds."""
    from .integrator import integrate_w

    traj = integrate_w(space, start, opts)
    ts, ys = traj.dense(4)
    first = None
    retained = True
    for t, y in zip(ts, ys):
        sig = ricci_signature(space, from_scale_invariant(PhasePoint(float(y[0]), float(y[1]))))
        if sig is Sign.POSITIVE:
            if first is None:
                first = float(t)
        elif first is not None:
            retained = False
            break
    return RicciRetention(start, first is not None, first, first is not None and retained, len(ts), traj.reason)

