"""Power-law behaviour of trajectory tails near ``w1 = 1``.

Trajectories of the planar system that leave every compact set approach the
line ``w1 = 1`` with ``w2 ~ C (w1 - 1)^(-alpha)``, where
``alpha = (1 - 2a) / (4a)``. These helpers fit ``alpha`` from samples, check
the two-sided envelope, and compare tails with reference curves.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .integrator import IntegrationOptions, Trajectory, integrate_w
from .space import PhasePoint, SpaceParams

DEFAULT_THRESHOLD = 1e-3
MIN_TAIL_POINTS = 10
SLOPE_TOL = 1e-9

# a fitted trajectory, or raw (w1, w2) sample arrays
TailSource = Union[Trajectory, tuple[np.ndarray, np.ndarray]]


class InsufficientTailError(ValueError):
    pass


class Ordering(str, enum.Enum):
    UNDER = "Under"
    OVER = "Over"
    UNDETERMINED = "Undetermined"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TailFit:
    alpha_hat: float
    window: tuple[float, float]  # range of w1 - 1
    residual: float
    n_points: int
    log_coefficient: float


@dataclass(frozen=True)
class EnvelopeReport:
    lower_ok: bool
    upper_ok: bool
    C1_est: float
    C2_est: float
    lower_slope: float
    upper_slope: float

    @property
    def violated(self) -> tuple[str, ...]:
        return tuple(side for side, ok in (("lower", self.lower_ok), ("upper", self.upper_ok)) if not ok)


def predicted_exponent(space: SpaceParams) -> float:
    return (1.0 - 2.0 * space.a) / (4.0 * space.a)


def integrate_tail(
    space: SpaceParams,
    start: PhasePoint | Sequence[float],
    until: float = 1e-4,
    opts: IntegrationOptions | None = None,
) -> Trajectory:
    """Integrate the planar system until ``w1 - 1 < until``.

    The default options raise the state cap to 1e12, since ``w2`` grows like
    ``(w1 - 1)^(-alpha)``.
    """
    if opts is None:
        opts = IntegrationOptions(state_bounds=(1e-8, 1e12), t_max=1e3)

    def stop(t, y):
        return "tail" if y[0] - 1.0 < until else None

    opts = dataclasses.replace(opts, stop_conditions=opts.stop_conditions + (stop,))
    return integrate_w(space, start, opts)


def _samples(source: TailSource, per_step: int = 16) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(source, Trajectory):
        _, y = source.dense(per_step)
        return y[:, 0], y[:, 1]
    w1, w2 = source
    return np.asarray(w1, dtype=float), np.asarray(w2, dtype=float)


def _window(source: TailSource, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    w1, w2 = _samples(source)
    u = w1 - 1.0
    mask = (u >= lo) & (u <= hi) & (w2 > 0)
    return u[mask], w2[mask]


def fit_tail_exponent(source: TailSource, threshold: float = DEFAULT_THRESHOLD) -> TailFit:
    """OLS slope of ``log w2`` against ``-log(w1 - 1)`` on ``[threshold/10, threshold]``."""
    lo, hi = threshold / 10.0, threshold
    u, w2 = _window(source, lo, hi)
    if len(u) < MIN_TAIL_POINTS:
        raise InsufficientTailError(
            f"{len(u)} samples with w1 - 1 in [{lo:.3g}, {hi:.3g}], need {MIN_TAIL_POINTS}"
        )
    x = -np.log(u)
    y = np.log(w2)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return TailFit(float(slope), (float(u.min()), float(u.max())), residual, int(len(u)), float(intercept))


def _log_slope(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.polyfit(np.log(u), np.log(v), 1)[0])


def envelope_check(
    source: TailSource,
    epsilon: float,
    alpha: float,
    threshold: float = DEFAULT_THRESHOLD,
) -> EnvelopeReport:
    """Check ``C1 (w1-1)^(-(1-eps) alpha) <= w2 <= C2 (w1-1)^(-(1+eps) alpha)`` on the tail.

    ``w2 (w1-1)^((1-eps) alpha)`` must not decay as ``w1 -> 1``, and
    ``w2 (w1-1)^((1+eps) alpha)`` must not grow. Each is judged from its
    log-log slope over the window; the constants are the extreme values
    of the two products over the window.
    """
    u, w2 = _window(source, threshold / 10.0, threshold)
    if len(u) < MIN_TAIL_POINTS:
        raise InsufficientTailError(f"{len(u)} tail samples, need {MIN_TAIL_POINTS}")
    lower = w2 * u ** ((1.0 - epsilon) * alpha)
    upper = w2 * u ** ((1.0 + epsilon) * alpha)
    lower_slope = _log_slope(u, lower)
    upper_slope = _log_slope(u, upper)
    return EnvelopeReport(
        lower_ok=lower_slope <= SLOPE_TOL,
        upper_ok=upper_slope >= -SLOPE_TOL,
        C1_est=float(lower.min()),
        C2_est=float(upper.max()),
        lower_slope=lower_slope,
        upper_slope=upper_slope,
    )


def ordering_vs_curve(
    space: SpaceParams,
    source: TailSource,
    alpha: float,
    coefficient: float,
    thresholds: Sequence[float] = (1e-3, 1e-4, 1e-5),
) -> Ordering:
    """Compare a tail with ``w2 = coefficient (w1 - 1)^(-alpha)``.

    Each threshold window with enough samples gives a verdict; the result is
    the common verdict, or Undetermined if they disagree, if any window is
    mixed, or if the tail exponent equals ``alpha`` (then only the
    coefficient decides).
    """
    if math.isclose(predicted_exponent(space), alpha, rel_tol=1e-9):
        return Ordering.UNDETERMINED
    verdicts = set()
    for thr in thresholds:
        u, w2 = _window(source, thr / 10.0, thr)
        if len(u) < MIN_TAIL_POINTS:
            continue
        gap = w2 - coefficient * u ** (-alpha)
        if np.all(gap > 0):
            verdicts.add(Ordering.OVER)
        elif np.all(gap < 0):
            verdicts.add(Ordering.UNDER)
        else:
            return Ordering.UNDETERMINED
    if len(verdicts) != 1:
        return Ordering.UNDETERMINED
    return verdicts.pop()


def tail_is_monotone(source: TailSource, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """In time order: ``w1`` strictly decreasing and ``w2`` strictly increasing."""
    w1, w2 = _samples(source)
    mask = w1 - 1.0 < threshold
    a, b = w1[mask], w2[mask]
    return bool(np.all(np.diff(a) < 0) and np.all(np.diff(b) > 0))
