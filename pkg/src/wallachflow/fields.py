"""Right-hand sides of the normalized Ricci flow in three coordinate systems.

* ``field_x``: the 3D flow ``dx_i/dt = -2 x_i (r_i - S/n)``;
* ``field_x_reduced``: the closed-form two-variable system on ``x1 x2 x3 = 1``;
* ``field_w``: the scale-invariant planar system ``(f, g)``.

The reduced system equals :data:`REDUCED_TIME_FACTOR` times the restriction of
``field_x`` to the unit-volume surface: the two describe the same curves with
a constant time rescaling. ``field_w`` is the w-velocity of ``field_x``
multiplied by ``x3``, again the same curves with the same orientation.
"""

from __future__ import annotations

import math

import numpy as np

from .curvature import principal_ricci
from .space import Metric3, PhasePoint, SpaceParams, to_scale_invariant

REDUCED_TIME_FACTOR = 3.0


def field_x(space: SpaceParams, m: Metric3) -> tuple[float, float, float]:
    r = principal_ricci(space, m)
    # S/n = d (r1 + r2 + r3) / (3 d); d cancels
    s_over_n = sum(r) / 3.0
    x = m.as_tuple()
    return tuple(-2.0 * x[i] * (r[i] - s_over_n) for i in range(3))


def field_x_reduced(space: SpaceParams, x1: float, x2: float) -> tuple[float, float]:
    a = space.a
    inv = 1.0 / (x1 * x1 * x2 * x2)
    dx1 = (x1 / x2 + x1 * x1 * x2 - 2.0) - 2.0 * a * x1 * (2.0 * x1 * x1 - x2 * x2 - inv)
    dx2 = (x2 / x1 + x1 * x2 * x2 - 2.0) - 2.0 * a * x2 * (2.0 * x2 * x2 - x1 * x1 - inv)
    return (dx1, dx2)


def field_w(space: SpaceParams, p: PhasePoint) -> tuple[float, float]:
    return _fg(space.a, p.w1, p.w2)


def _fg(a: float, w1: float, w2: float) -> tuple[float, float]:
    f = (w1 - 1.0) * (w1 - 2.0 * a * w1 * w2 - 2.0 * a * w2)
    g = (w2 - 1.0) * (w2 - 2.0 * a * w1 * w2 - 2.0 * a * w1)
    return (f, g)


def jacobian_w(space: SpaceParams, p: PhasePoint) -> np.ndarray:
    a = space.a
    w1, w2 = p
    u = w1 - 2 * a * w1 * w2 - 2 * a * w2
    v = w2 - 2 * a * w1 * w2 - 2 * a * w1
    return np.array(
        [
            [u + (w1 - 1) * (1 - 2 * a * w2), -2 * a * (w1 - 1) * (w1 + 1)],
            [-2 * a * (w2 - 1) * (w2 + 1), v + (w2 - 1) * (1 - 2 * a * w1)],
        ]
    )


def induced_w_velocity(space: SpaceParams, m: Metric3) -> tuple[float, float]:
    """w-velocity of the 3D flow by the chain rule, rescaled by ``x3``."""
    F = field_x(space, m)
    x1, x2, x3 = m
    w1, w2 = x3 / x1, x3 / x2
    dw1 = w1 * (F[2] / x3 - F[0] / x1)
    dw2 = w2 * (F[2] / x3 - F[1] / x2)
    return (x3 * dw1, x3 * dw2)


def consistency_check(space: SpaceParams, m: Metric3) -> float:
    """Norm of ``induced_w_velocity(m) - field_w(w(m))``."""
    induced = induced_w_velocity(space, m)
    direct = field_w(space, to_scale_invariant(m))
    return math.hypot(induced[0] - direct[0], induced[1] - direct[1])


def reduced_factor(space: SpaceParams, x1: float, x2: float) -> float:
    """Ratio of the closed-form reduced system to the restricted 3D field.

    Returns NaN where the 3D field vanishes.
    """
    red = field_x_reduced(space, x1, x2)
    F = field_x(space, Metric3(x1, x2, 1.0 / (x1 * x2)))
    num = red[0] * F[0] + red[1] * F[1]
    den = F[0] * F[0] + F[1] * F[1]
    return num / den if den > 0 else math.nan


def first_integral_residual(space: SpaceParams, m: Metric3) -> float:
    """``sum F_i / x_i``; zero because the flow preserves ``x1 x2 x3``."""
    F = field_x(space, m)
    return sum(F[i] / x for i, x in enumerate(m))


def einstein_spread(space: SpaceParams, m: Metric3) -> float:
    """Largest pairwise difference of the principal Ricci curvatures."""
    r = principal_ricci(space, m)
    return max(r) - min(r)


# --- array forms for the integrator ------------------------------------------


def w_system(space: SpaceParams):
    a = space.a

    def rhs(t, y):
        return np.array(_fg(a, y[0], y[1]))

    return rhs


def x_system(space: SpaceParams):
    a = space.a

    def rhs(t, y):
        x1, x2, x3 = y
        k1 = x2 * x3 + a * (x1 * x1 - x2 * x2 - x3 * x3)
        k2 = x1 * x3 + a * (x2 * x2 - x1 * x1 - x3 * x3)
        k3 = x1 * x2 + a * (x3 * x3 - x1 * x1 - x2 * x2)
        two_vol = 2.0 * x1 * x2 * x3
        mean = (k1 + k2 + k3) / 3.0
        return np.array(
            [
                -2.0 * x1 * (k1 - mean) / two_vol,
                -2.0 * x2 * (k2 - mean) / two_vol,
                -2.0 * x3 * (k3 - mean) / two_vol,
            ]
        )

    return rhs


def x2_system(space: SpaceParams):
    def rhs(t, y):
        return np.array(field_x_reduced(space, y[0], y[1]))

    return rhs


def kahler_defect(space: SpaceParams, m: Metric3) -> float:
    """``F1 + F2 - F3``; vanishes identically at a = 1/6 when ``x3 = x1 + x2``."""
    F = field_x(space, m)
    return F[0] + F[1] - F[2]

