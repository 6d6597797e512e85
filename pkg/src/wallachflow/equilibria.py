"""Equilibria of the planar system, special points, and tangency analysis.

The four singular points ``E0 .. E3`` are Einstein metrics; their type is
read off the eigenvalues of :func:`~wallachflow.fields.jacobian_w`.
The Q-point is where the flow touches the upper branch of ``r1``, found as
the root of the tangency function ``W(t)`` along the parametrization
:func:`param_r1`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .curvature import grad_l3, grad_rho1, l_residuals, rho_residuals
from .fields import field_w, jacobian_w
from .space import Metric3, PhasePoint, SpaceParams, from_scale_invariant, normalize_volume

EQUILIBRIUM_TOL = 1e-10
EIGEN_ZERO_TOL = 1e-10


class DegenerateSpaceError(ValueError):
    """At a = 1/4 the four equilibria coincide at (1, 1)."""


class NotAnEquilibriumError(ValueError):
    pass


class NoRootError(RuntimeError):
    pass


class Classification(str, enum.Enum):
    UNSTABLE_NODE = "UnstableNode"
    STABLE_NODE = "StableNode"
    SADDLE = "Saddle"
    DEGENERATE = "Degenerate"
    FOCUS = "Focus"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EquilibriumReport:
    location: PhasePoint
    # floats when real, otherwise a conjugate pair
    eigenvalues: tuple[float, float] | tuple[complex, complex]
    classification: Classification
    einstein_metric: Metric3


def singular_points(space: SpaceParams) -> list[PhasePoint]:
    """``[E0, E1, E2, E3] = [(1,1), (q,1), (1,q), (1/q,1/q)]``, ``q = 2a/(1-2a)``."""
    if space.degenerate:
        raise DegenerateSpaceError("a = 1/4: all singular points collapse to (1, 1)")
    q = space.q
    return [PhasePoint(1.0, 1.0), PhasePoint(q, 1.0), PhasePoint(1.0, q), PhasePoint(1.0 / q, 1.0 / q)]


def classify_eigenvalues(eig: np.ndarray, tol: float = EIGEN_ZERO_TOL) -> Classification:
    if np.any(np.abs(eig) <= tol):
        return Classification.DEGENERATE
    if np.any(np.abs(eig.imag) > tol):
        return Classification.FOCUS
    re = eig.real
    if re[0] * re[1] < 0:
        return Classification.SADDLE
    return Classification.UNSTABLE_NODE if re[0] > 0 else Classification.STABLE_NODE


def classify_equilibrium(space: SpaceParams, p: PhasePoint) -> EquilibriumReport:
    f, g = field_w(space, p)
    if math.hypot(f, g) > EQUILIBRIUM_TOL:
        raise NotAnEquilibriumError(f"field does not vanish at {p}: |(f, g)| = {math.hypot(f, g):.3g}")
    eig = np.linalg.eigvals(jacobian_w(space, p))
    eig = np.sort_complex(eig.astype(complex))
    if np.all(eig.imag == 0.0):
        pair = (float(eig[0].real), float(eig[1].real))
    else:
        pair = (complex(eig[0]), complex(eig[1]))
    return EquilibriumReport(
        location=p,
        eigenvalues=pair,
        classification=classify_eigenvalues(eig),
        einstein_metric=normalize_volume(from_scale_invariant(p)),
    )


def equilibria(space: SpaceParams) -> list[EquilibriumReport]:
    return [classify_equilibrium(space, p) for p in singular_points(space)]


def special_points(space: SpaceParams) -> list[PhasePoint]:
    """``P1 = (a, 1)``, ``P2 = (1, a)``, ``P3 = (1/a, 1/a)``."""
    a = space.a
    return [PhasePoint(a, 1.0), PhasePoint(1.0, a), PhasePoint(1.0 / a, 1.0 / a)]


def special_point_residuals(space: SpaceParams) -> list[tuple[float, float]]:
    """The two ``rho`` values that vanish at each of ``P1, P2, P3``."""
    pairs = [(1, 2), (0, 2), (0, 1)]
    out = []
    for p, (i, j) in zip(special_points(space), pairs):
        rho = rho_residuals(space, p)
        out.append((rho[i], rho[j]))
    return out


# --- tangency along r1 -------------------------------------------------------


def _root_term(a: float, t: float) -> float:
    return math.sqrt(4 * a * a * (1 - t * t) + t * t)


def param_r1(space: SpaceParams, t: float) -> PhasePoint:
    """Upper branch of ``r1`` in the domain, for ``0 < t < 1``."""
    a = space.a
    w2 = (t + _root_term(a, t)) / (2 * a * t)
    return PhasePoint(t * w2, w2)


def tangency_w(space: SpaceParams, t: float) -> float:
    """``W(t)``; the flow's normal component on ``r1`` is ``w2^2 / (2 a^2) W``."""
    a = space.a
    a2 = a * a
    root = _root_term(a, t)
    return (
        ((2 - 8 * a2) * t * t + (2 * a2 + a - 1) * t + 4 * a2) * root
        + 2 * (4 * a2 - 1) * (2 * a2 - 1) * t**3
        - (a - 1) * (4 * a2 - 1) * t * t
        - 8 * a2 * (2 * a2 - 1) * t
        + 2 * a2 * (2 * a - 1)
    )


@dataclass(frozen=True)
class QPointReport:
    t_star: float
    q_point: PhasePoint
    residual: float
    roots: tuple[float, ...]

    @property
    def unique(self) -> bool:
        return len(self.roots) == 1


def _refine(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    # one Newton step with a finite-difference slope
    h = 1e-7
    slope = (fn(t + h) - fn(t - h)) / (2 * h)
    if slope != 0.0:
        t_new = t - fn(t) / slope
        if abs(t_new - t) < 10 * tol and abs(fn(t_new)) <= abs(fn(t)):
            t = t_new
    return t


def q_point(space: SpaceParams, grid: int = 10_000) -> QPointReport:
    """Roots of ``W`` on ``(0, 1)`` mapped onto ``r1``.

    The interval is scanned on ``grid`` interior points; every sign change is
    bisected to 1e-12 and polished. ``t_star`` is the smallest root.
    """
    ts = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    vals = np.array([tangency_w(space, float(t)) for t in ts])
    roots = []
    for i in range(len(ts) - 1):
        if vals[i] == 0.0:
            roots.append(float(ts[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_refine(lambda t: tangency_w(space, t), float(ts[i]), float(ts[i + 1])))
    if not roots:
        raise NoRootError(f"W(t) has no sign change on (0, 1) for a = {space.a}")
    t_star = roots[0]
    return QPointReport(t_star, param_r1(space, t_star), tangency_w(space, t_star), tuple(roots))


@dataclass(frozen=True)
class Transversality:
    inner_product: float
    factored: float
    W: float
    sign: int


def transversality_l3(space: SpaceParams, p: PhasePoint, tol: float = 1e-9) -> Transversality:
    """Normal component of the flow on ``s3``, directly and in factored form.

    ``factored = 2 (w1 - 1)(w2 - 1) W`` with
    ``W = 12a w1^2 w2^2 - 3(w1 + w2) w1 w2 (1 - 2a) - (w1 - w2)^2 (1 + 2a)``.
    """
    l3 = l_residuals(p)[2]
    scale = 1.0 + (p.w1 * p.w2) ** 2
    if abs(l3) > tol * scale:
        raise ValueError(f"{p} is not on s3 (l3 = {l3:.3g})")
    a = space.a
    w1, w2 = p
    f, g = field_w(space, p)
    d1, d2 = grad_l3(p)
    direct = f * d1 + g * d2
    W = 12 * a * w1 * w1 * w2 * w2 - 3 * (w1 + w2) * w1 * w2 * (1 - 2 * a) - (w1 - w2) ** 2 * (1 + 2 * a)
    factored = 2 * (w1 - 1) * (w2 - 1) * W
    return Transversality(direct, factored, W, int(np.sign(direct)))


def reduced_l3_W(space: SpaceParams, p: PhasePoint) -> float:
    """``W`` after substituting ``3 w1^2 w2^2 = 2 (w1 + w2) w1 w2 + (w1 - w2)^2``."""
    a = space.a
    w1, w2 = p
    return (14 * a - 3) * (w1 + w2) * w1 * w2 - (w1 - w2) ** 2 * (1 - 2 * a)


def transversality_r1(space: SpaceParams, t: float) -> Transversality:
    """Normal component of the flow on the upper branch of ``r1`` at ``param_r1(t)``.

    ``factored = w2^2 / (2 a^2) W(t)``.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    p = param_r1(space, t)
    f, g = field_w(space, p)
    d1, d2 = grad_rho1(space, p)
    direct = f * d1 + g * d2
    W = tangency_w(space, t)
    factored = p.w2**2 / (2 * space.a**2) * W
    return Transversality(direct, factored, W, int(np.sign(direct)))


def disjointness_certificate(a: float) -> float:
    """``(18a - 1)(2a - 1)(1 + 6a)^2``, the discriminant sign for ``r1 ∩ s3``."""
    return (18 * a - 1) * (2 * a - 1) * (1 + 6 * a) ** 2
