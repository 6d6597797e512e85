"""Adaptive Dormand-Prince 5(4) integration with dense output and events.

The core routine :func:`integrate` works for any autonomous or
non-autonomous right-hand side ``rhs(t, y)`` with a strictly positive state.
Events are scalar functions of the state; every sign change inside an
accepted step is located by bisection on the dense interpolant.

On top of it sit the region helpers used by the experiments:
:func:`integrate_until_exit`, :func:`track_region` and
:func:`no_return_check`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .curvature import REGION_CURVES, in_region, region_residuals
from .fields import w_system, x_system
from .space import Metric3, PhasePoint, SpaceParams

# Dormand & Prince (1980) coefficients; dense output from Shampine (1986)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_A = [np.array(row) for row in _A]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

T_MAX = "t_max"
EVENT = "event"
EQUILIBRIUM = "equilibrium"
STEP_FLOOR = "step_floor"
STATE_CAP = "state_cap"
MAX_STEPS = "max_steps"


class IntegrationError(RuntimeError):
    """Non-finite field at the start or an invalid initial state."""


@dataclass(frozen=True)
class IntegrationOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_max: float = 100.0
    max_steps: int = 200_000
    step_floor: float = 1e-14
    max_step: float = math.inf
    # trajectories stop once any component leaves [lo, hi]
    state_bounds: tuple[float, float] = (1e-8, 1e6)
    stop_at_equilibrium: bool = False
    equilibrium_tol: float = 1e-13
    stop_conditions: tuple[Callable[[float, np.ndarray], str | None], ...] = ()
    event_tol: float = 1e-9
    event_time_tol: float = 1e-10

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")


@dataclass(frozen=True)
class Event:
    name: str
    fn: Callable[[np.ndarray], float]
    terminal: bool = False
    # -1 only +→- crossings, +1 only -→+, 0 both
    direction: int = 0


@dataclass(frozen=True)
class EventRecord:
    name: str
    t: float
    y: np.ndarray
    direction: str  # "+-" or "-+"
    value: float


@dataclass
class _Segment:
    t0: float
    h: float
    y0: np.ndarray
    Q: np.ndarray
    # interpolant lives in log coordinates; exponentiate on evaluation
    log: bool = False

    def __call__(self, t: float) -> np.ndarray:
        x = (t - self.t0) / self.h
        z = self.y0 + self.h * (self.Q @ np.array([x, x * x, x**3, x**4]))
        return np.exp(z) if self.log else z


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    events: list[EventRecord]
    reason: str
    detail: str = ""
    n_accepted: int = 0
    n_rejected: int = 0
    n_fev: int = 0
    steps: np.ndarray = field(default_factory=lambda: np.empty(0))
    segments: list[_Segment] = field(default_factory=list, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    def __call__(self, t: float) -> np.ndarray:
        """Dense-output state at time ``t`` within the integrated span."""
        if not self.segments:
            return self.y[0].copy()
        starts = [s.t0 for s in self.segments]
        i = int(np.searchsorted(starts, t, side="right")) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i](t)

    def dense(self, per_step: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """Samples refined with ``per_step`` interior points per step."""
        ts, ys = [self.t[0]], [self.y[0]]
        for seg in self.segments:
            for j in range(1, per_step + 1):
                tt = seg.t0 + seg.h * j / per_step
                ts.append(tt)
                ys.append(seg(tt))
        return np.array(ts), np.array(ys)


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(rhs, t0, y0, f0, scale, t_max) -> float:
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_max)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_max)


def _locate(seg: _Segment, fn, t_lo, v_lo, t_hi, v_hi, tol_t, tol_v):
    # bisection on the dense output; keep going past tol_t until |fn| <= tol_v
    for _ in range(200):
        if (t_hi - t_lo) <= tol_t and min(abs(v_lo), abs(v_hi)) <= tol_v:
            break
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid in (t_lo, t_hi):
            break
        v_mid = fn(seg(t_mid))
        if v_mid == 0.0:
            return t_mid, v_mid
        if (v_mid < 0) == (v_lo < 0):
            t_lo, v_lo = t_mid, v_mid
        else:
            t_hi, v_hi = t_mid, v_mid
    return (t_lo, v_lo) if abs(v_lo) <= abs(v_hi) else (t_hi, v_hi)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    opts: IntegrationOptions | None = None,
    events: Sequence[Event] = (),
    t0: float = 0.0,
    log_state: bool = False,
) -> Trajectory:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t0 + opts.t_max``.

    With ``log_state`` the solver steps ``z = log y`` under
    ``dz/dt = rhs(t, y) / y``. The error test still bounds the error in
    ``y`` by ``abs_tol + rel_tol |y|``, and linear invariants of ``z``, such
    as ``log(x1 x2 x3)`` for the 3D flow, are conserved up to roundoff.
    Samples, events and stop tests always see ``y``.

    Termination reasons: ``t_max``, ``event`` (terminal event or stop
    condition), ``equilibrium``, ``step_floor``, ``state_cap``,
    ``max_steps``.
    """
    opts = opts or IntegrationOptions()
    y_user = np.asarray(y0, dtype=float).copy()
    if not np.all(y_user > 0) or not np.all(np.isfinite(y_user)):
        raise IntegrationError(f"initial state must be strictly positive and finite: {y_user}")
    rtol, atol = opts.rel_tol, opts.abs_tol
    if log_state:
        user_rhs = rhs

        def rhs(t, z):
            x = np.exp(z)
            return np.asarray(user_rhs(t, x), dtype=float) / x

        def out(z):
            return np.exp(z)

        def err_scale(z_a, z_b):
            return rtol + atol / np.exp(np.maximum(z_a, z_b))

        y = np.log(y_user)
    else:
        def out(z):
            return z

        def err_scale(y_a, y_b):
            return atol + rtol * np.maximum(np.abs(y_a), np.abs(y_b))

        y = y_user
    f = np.asarray(rhs(t0, y), dtype=float)
    if not np.all(np.isfinite(f)):
        raise IntegrationError(f"non-finite field at the initial state {y_user}")

    lo, hi = opts.state_bounds
    t_end = t0 + opts.t_max
    t = t0
    h = min(_initial_step(rhs, t0, y, f, err_scale(y, y), opts.t_max), opts.max_step)

    ts, ys, hs = [t], [y_user.copy()], []
    recs: list[EventRecord] = []
    segments: list[_Segment] = []
    ev_vals = [float(e.fn(y_user)) for e in events]
    n_acc = n_rej = 0
    n_fev = 2
    nonfinite = False
    K = np.empty((7, y.size))

    def finish(reason_, detail_=""):
        return Trajectory(
            t=np.array(ts), y=np.array(ys), events=recs, reason=reason_, detail=detail_,
            n_accepted=n_acc, n_rejected=n_rej, n_fev=n_fev, steps=np.array(hs), segments=segments,
        )

    if opts.stop_at_equilibrium and _at_equilibrium(f * (y_user if log_state else 1.0), y_user, opts):
        return finish(EQUILIBRIUM)

    while True:
        if n_acc >= opts.max_steps:
            return finish(MAX_STEPS)
        floor = opts.step_floor * max(1.0, abs(t))
        h = min(h, t_end - t, opts.max_step)
        if h < floor:
            if t_end - t <= floor:
                return finish(T_MAX)
            if nonfinite:
                raise IntegrationError(f"non-finite field near t={t:.17g}, y={out(y)}")
            return finish(STEP_FLOOR, f"step {h:.3g} below floor at t={t:.17g}")

        # trial step
        K[0] = f
        with np.errstate(invalid="ignore", over="ignore"):
            for s in range(1, 6):
                dy = h * (_A[s] @ K[:s])
                K[s] = rhs(t + _C[s] * h, y + dy)
            y_new = y + h * (_B @ K[:6])
            f_new = np.asarray(rhs(t + h, y_new), dtype=float)
        K[6] = f_new
        n_fev += 6

        finite = bool(np.all(np.isfinite(K)) and np.all(np.isfinite(y_new)))
        ok = finite and (log_state or np.all(y_new > 0))
        if ok:
            err_vec = h * (_E @ K)
            err = _rms(err_vec / err_scale(y, y_new))
        else:
            err = math.inf
        if not err <= 1.0:
            nonfinite = not finite
            n_rej += 1
            if math.isfinite(err):
                h *= max(MIN_FACTOR, SAFETY * err**-0.2)
            else:
                h *= 0.25
            continue

        nonfinite = False
        seg = _Segment(t, h, y.copy(), K.T @ _P, log_state)
        segments.append(seg)
        t_new = t + h
        n_acc += 1
        hs.append(h)

        # events inside (t, t_new]
        terminal_hit = None
        new_vals = []
        y_out = out(y_new)
        for e, v_old in zip(events, ev_vals):
            v_new = float(e.fn(y_out))
            new_vals.append(v_new)
            if v_old == 0.0:
                continue
            if (v_old > 0) == (v_new > 0) and v_new != 0.0:
                continue
            sign = "+-" if v_old > 0 else "-+"
            if (e.direction < 0 and sign == "-+") or (e.direction > 0 and sign == "+-"):
                continue
            te, ve = _locate(seg, e.fn, t, v_old, t_new, v_new, opts.event_time_tol, opts.event_tol)
            rec = EventRecord(e.name, te, seg(te), sign, ve)
            recs.append(rec)
            if e.terminal and (terminal_hit is None or te < terminal_hit.t):
                terminal_hit = rec
        recs.sort(key=lambda r: r.t)
        ev_vals = new_vals

        if terminal_hit is not None:
            # drop records past the terminal crossing
            recs[:] = [r for r in recs if r.t <= terminal_hit.t]
            ts.append(terminal_hit.t)
            ys.append(terminal_hit.y.copy())
            return finish(EVENT, terminal_hit.name)

        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y_out)

        if np.any(y_out > hi) or np.any(y_out < lo):
            return finish(STATE_CAP)
        for cond in opts.stop_conditions:
            msg = cond(t, y_out)
            if msg:
                return finish(EVENT, str(msg))
        if opts.stop_at_equilibrium and _at_equilibrium(f * (y_out if log_state else 1.0), y_out, opts):
            return finish(EQUILIBRIUM)
        if t >= t_end:
            return finish(T_MAX)

        factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err**-0.2)
        h *= max(MIN_FACTOR, factor)


def _at_equilibrium(f: np.ndarray, y: np.ndarray, opts: IntegrationOptions) -> bool:
    return float(np.linalg.norm(f)) < opts.equilibrium_tol * (1.0 + float(np.linalg.norm(y)))


# --- system wrappers ---------------------------------------------------------

X_BOUNDS = (1e-8, 1e8)


def integrate_w(
    space: SpaceParams,
    start: PhasePoint | Sequence[float],
    opts: IntegrationOptions | None = None,
    events: Sequence[Event] = (),
) -> Trajectory:
    return integrate(w_system(space), tuple(start), opts, events)


def integrate_x(
    space: SpaceParams,
    start: Metric3 | Sequence[float],
    opts: IntegrationOptions | None = None,
    events: Sequence[Event] = (),
    log_state: bool = True,
) -> Trajectory:
    """3D normalized flow; default state bounds are ``[1e-8, 1e8]``.

    Steps in log coordinates by default, which keeps ``x1 x2 x3`` fixed to
    roundoff even as a component collapses.
    """
    if opts is None:
        opts = IntegrationOptions(state_bounds=X_BOUNDS)
    return integrate(x_system(space), tuple(start), opts, events, log_state=log_state)


def scaled_region_residual(space: SpaceParams, region: str, i: int, p: PhasePoint) -> float:
    """Residual ``i`` of a region divided by ``1 + (w1 w2)^2``.

    Same sign and zero set; the scaling keeps an absolute event tolerance
    meaningful when ``w2`` is large.
    """
    return region_residuals(space, region, p)[i] / (1.0 + (p.w1 * p.w2) ** 2)


def region_events(space: SpaceParams, region: str, terminal: bool = False) -> list[Event]:
    ids = REGION_CURVES[region]
    events = []
    for i, name in enumerate(ids):
        def fn(y, i=i):
            return scaled_region_residual(space, region, i, PhasePoint(y[0], y[1]))

        events.append(Event(name, fn, terminal=terminal, direction=-1 if terminal else 0))
    return events


# --- region exit -------------------------------------------------------------


class RegionError(ValueError):
    """Start point outside the region it is supposed to leave."""


@dataclass
class ExitReport:
    exited: bool
    exit_time: float | None
    exit_curve_id: str | None
    exit_point: PhasePoint | None
    trajectory: Trajectory


def integrate_until_exit(
    space: SpaceParams,
    start: PhasePoint,
    region: str,
    opts: IntegrationOptions | None = None,
) -> ExitReport:
    """Integrate the w-system until the first crossing out of ``region``.

    ``exited`` is False (no exit) when the run ends for any other reason
    while the state is still inside.
    """
    if not in_region(space, region, start):
        raise RegionError(f"{start} is not strictly inside region {region}")
    opts = opts or IntegrationOptions()
    traj = integrate_w(space, start, opts, region_events(space, region, terminal=True))
    if traj.reason == EVENT and traj.events:
        last = traj.events[-1]
        return ExitReport(True, float(last.t), last.name, PhasePoint(*map(float, last.y)), traj)
    return ExitReport(False, None, None, None, traj)


@dataclass
class RegionHistory:
    start_inside: bool
    first_exit: EventRecord | None
    reentries: list[float]
    entries: list[float]
    trajectory: Trajectory

    @property
    def exited(self) -> bool:
        return self.first_exit is not None

    @property
    def reentered(self) -> bool:
        return bool(self.reentries)


def track_region(
    space: SpaceParams,
    start: PhasePoint,
    region: str,
    opts: IntegrationOptions | None = None,
) -> RegionHistory:
    """Integrate to the horizon and record every entry into / exit from a region.

    Membership is the region's sign system. A crossing with all other
    residuals positive is an entry (``-+``) or exit (``+-``); accepted
    samples after the first exit are also checked for being inside.
    """
    opts = opts or IntegrationOptions()
    events = region_events(space, region)
    traj = integrate_w(space, start, opts, events)
    ids = list(REGION_CURVES[region])

    def others_positive(rec: EventRecord) -> bool:
        vals = region_residuals(space, region, PhasePoint(*map(float, rec.y)))
        k = ids.index(rec.name)
        return all(v > 0 for j, v in enumerate(vals) if j != k)

    inside = in_region(space, region, start)
    start_inside = inside
    first_exit = None
    entries: list[float] = []
    reentries: list[float] = []
    for rec in traj.events:
        if not others_positive(rec):
            continue
        if rec.direction == "+-" and inside:
            inside = False
            if first_exit is None:
                first_exit = rec
        elif rec.direction == "-+" and not inside:
            inside = True
            entries.append(rec.t)
            if first_exit is not None:
                reentries.append(rec.t)

    if first_exit is not None:
        for tk, yk in zip(traj.t, traj.y):
            if tk > first_exit.t and in_region(space, region, PhasePoint(yk[0], yk[1])):
                if not reentries or tk < reentries[0]:
                    reentries.append(float(tk))
                    reentries.sort()
                break
    return RegionHistory(start_inside, first_exit, reentries, entries, traj)


def no_return_check(
    space: SpaceParams,
    start: PhasePoint,
    region: str,
    horizon: float = 100.0,
    opts: IntegrationOptions | None = None,
) -> bool:
    """True when the trajectory never re-enters ``region`` after its first exit."""
    opts = replace(opts or IntegrationOptions(), t_max=horizon)
    return not track_region(space, start, region, opts).reentered
