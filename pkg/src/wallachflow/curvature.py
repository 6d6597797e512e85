"""Ricci and scalar curvature, curvature-sign classification, boundary curves.

Metric-side quantities (``gamma_i``, ``k_i``) take a :class:`Metric3`; the
w-plane polynomials ``l_i``, ``rho_i`` and the scalar boundary expression take
a :class:`PhasePoint` and have the same sign as their metric counterparts at
``(1/w1, 1/w2, 1)`` (a positive factor ``w1^2 w2^2`` has been cleared).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .space import Metric3, PhasePoint, SpaceParams, from_scale_invariant, submersion_metric

ZERO_TOL = 1e-12


class Sign(str, enum.Enum):
    POSITIVE = "Positive"
    BOUNDARY = "Boundary"
    MIXED = "Mixed"
    # scalar curvature is a single number, so "mixed" reads as negative
    NEGATIVE = "Negative"

    def __str__(self) -> str:
        return self.value


class NotWallachError(ValueError):
    """Sectional-curvature criteria are only known for a in {1/6, 1/8, 1/9}."""


@dataclass(frozen=True)
class CurvatureSignature:
    sectional: Sign | None
    ricci: Sign
    scalar: Sign


@dataclass(frozen=True)
class BoundaryResiduals:
    gamma: tuple[float, float, float]
    k: tuple[float, float, float]
    l: tuple[float, float, float]
    rho: tuple[float, float, float]
    s_scalar: float


def _is_zero(value: float, scale: float) -> bool:
    return abs(value) <= ZERO_TOL * (1.0 + abs(scale))


# --- metric side -------------------------------------------------------------


def ricci_numerators(space: SpaceParams, m: Metric3) -> tuple[float, float, float]:
    """``k_i = x_j x_k + a (x_i^2 - x_j^2 - x_k^2)``."""
    a = space.a
    x1, x2, x3 = m
    return (
        x2 * x3 + a * (x1 * x1 - x2 * x2 - x3 * x3),
        x1 * x3 + a * (x2 * x2 - x1 * x1 - x3 * x3),
        x1 * x2 + a * (x3 * x3 - x1 * x1 - x2 * x2),
    )


def principal_ricci(space: SpaceParams, m: Metric3) -> tuple[float, float, float]:
    two_vol = 2.0 * m.volume
    k1, k2, k3 = ricci_numerators(space, m)
    return (k1 / two_vol, k2 / two_vol, k3 / two_vol)


def scalar_numerator(space: SpaceParams, m: Metric3) -> float:
    x1, x2, x3 = m
    return x1 * x2 + x1 * x3 + x2 * x3 - space.a * (x1 * x1 + x2 * x2 + x3 * x3)


def scalar_curvature(space: SpaceParams, m: Metric3) -> float:
    return space.d * scalar_numerator(space, m) / (2.0 * m.volume)


def gammas(m: Metric3) -> tuple[float, float, float]:
    """``gamma_i = (x_j - x_k)^2 + 2 x_i (x_j + x_k) - 3 x_i^2`` (a-independent)."""
    x1, x2, x3 = m

    def gam(xi, xj, xk):
        return (xj - xk) ** 2 + 2.0 * xi * (xj + xk) - 3.0 * xi * xi

    return (gam(x1, x2, x3), gam(x2, x1, x3), gam(x3, x1, x2))


def _is_normal(m: Metric3) -> bool:
    x = m.as_tuple()
    return max(x) / min(x) - 1.0 <= ZERO_TOL


def sectional_signature(m: Metric3, space: SpaceParams | None = None) -> Sign:
    """Sign of the sectional curvature of a Wallach-space metric.

    Pass ``space`` to have non-Wallach parameters refused with
    :class:`NotWallachError`.
    """
    if space is not None and not space.is_wallach:
        raise NotWallachError(
            f"sectional curvature signs are only available for a in {{1/6, 1/8, 1/9}}, got a={space.a}"
        )
    scale = max(m.as_tuple()) ** 2
    g = gammas(m)
    zero = [_is_zero(v, scale) for v in g]
    normal = _is_normal(m)
    if all(v > 0 and not z for v, z in zip(g, zero)) and not normal:
        return Sign.POSITIVE
    if all(v > 0 or z for v, z in zip(g, zero)):
        return Sign.BOUNDARY
    return Sign.MIXED


def ricci_signature(space: SpaceParams, m: Metric3) -> Sign:
    scale = max(m.as_tuple()) ** 2
    low = min(ricci_numerators(space, m))
    if _is_zero(low, scale):
        return Sign.BOUNDARY
    return Sign.POSITIVE if low > 0 else Sign.MIXED


def scalar_signature(space: SpaceParams, m: Metric3) -> Sign:
    scale = max(m.as_tuple()) ** 2
    s = scalar_numerator(space, m)
    if _is_zero(s, scale):
        return Sign.BOUNDARY
    return Sign.POSITIVE if s > 0 else Sign.NEGATIVE


def classify_metric(space: SpaceParams, m: Metric3) -> CurvatureSignature:
    """All three signatures; ``sectional`` is None outside the Wallach presets."""
    sec = sectional_signature(m) if space.is_wallach else None
    return CurvatureSignature(sec, ricci_signature(space, m), scalar_signature(space, m))


# --- w-plane polynomials -----------------------------------------------------


def l_residuals(p: PhasePoint) -> tuple[float, float, float]:
    w1, w2 = p
    a2, b2, ab = w1 * w1, w2 * w2, w1 * w2
    l1 = a2 * b2 - 2 * a2 * w2 + 2 * w1 * b2 + a2 + 2 * ab - 3 * b2
    l2 = a2 * b2 + 2 * a2 * w2 - 2 * w1 * b2 - 3 * a2 + 2 * ab + b2
    l3 = -3 * a2 * b2 + 2 * a2 * w2 + 2 * w1 * b2 + a2 - 2 * ab + b2
    return (l1, l2, l3)


def rho_residuals(space: SpaceParams, p: PhasePoint) -> tuple[float, float, float]:
    a = space.a
    w1, w2 = p
    a2, b2 = w1 * w1, w2 * w2
    r1 = -a * a2 * b2 - a * a2 + a * b2 + a2 * w2
    r2 = -a * a2 * b2 + a * a2 - a * b2 + w1 * b2
    r3 = a * a2 * b2 - a * a2 - a * b2 + w1 * w2
    return (r1, r2, r3)


def scalar_curve_residual(space: SpaceParams, p: PhasePoint) -> float:
    """``a(w1^2 w2^2 + w1^2 + w2^2) - w1^2 w2 - w1 w2^2 - w1 w2``; negative iff S > 0."""
    w1, w2 = p
    return space.a * (w1 * w1 * w2 * w2 + w1 * w1 + w2 * w2) - w1 * w1 * w2 - w1 * w2 * w2 - w1 * w2


def omega_residual(space: SpaceParams, p: PhasePoint) -> float:
    w1, w2 = p
    return w1 - 2 * space.a * w1 * w2 - 2 * space.a * w2


def lambda_residual(space: SpaceParams, p: PhasePoint) -> float:
    w1, w2 = p
    return w2 - 2 * space.a * w1 * w2 - 2 * space.a * w1


def kahler_residual(p: PhasePoint) -> float:
    """``1/w1 + 1/w2 - 1``; zero on the metrics with ``x3 = x1 + x2``."""
    return 1.0 / p.w1 + 1.0 / p.w2 - 1.0


def boundary_residuals(space: SpaceParams, p: PhasePoint) -> BoundaryResiduals:
    m = from_scale_invariant(p)
    return BoundaryResiduals(
        gamma=gammas(m),
        k=ricci_numerators(space, m),
        l=l_residuals(p),
        rho=rho_residuals(space, p),
        s_scalar=scalar_curve_residual(space, p),
    )


def grad_l3(p: PhasePoint) -> tuple[float, float]:
    w1, w2 = p
    d1 = -6 * w1 * w2 * w2 + 4 * w1 * w2 + 2 * w2 * w2 + 2 * w1 - 2 * w2
    d2 = -6 * w1 * w1 * w2 + 2 * w1 * w1 + 4 * w1 * w2 - 2 * w1 + 2 * w2
    return (d1, d2)


def grad_rho1(space: SpaceParams, p: PhasePoint) -> tuple[float, float]:
    a = space.a
    w1, w2 = p
    d1 = -2 * w1 * (w2 * (a * w2 - 1) + a)
    d2 = -2 * a * w1 * w1 * w2 + 2 * a * w2 + w1 * w1
    return (d1, d2)


# --- regions -----------------------------------------------------------------

REGION_CURVES = {
    "D": ("s1", "s2", "s3"),
    "R": ("r1", "r2", "r3"),
    "S": ("scalar",),
}


def region_residuals(space: SpaceParams, region: str, p: PhasePoint) -> tuple[float, ...]:
    """Sign system of a region: every entry is positive strictly inside.

    ``D`` (positive sectional) uses ``l_i``, ``R`` (positive Ricci) uses
    ``rho_i`` and ``S`` (positive scalar) uses minus the scalar curve residual.
    """
    if region == "D":
        return l_residuals(p)
    if region == "R":
        return rho_residuals(space, p)
    if region == "S":
        return (-scalar_curve_residual(space, p),)
    raise ValueError(f"unknown region {region!r}; expected one of D, R, S")


def in_region(space: SpaceParams, region: str, p: PhasePoint) -> bool:
    return all(v > 0 for v in region_residuals(space, region, p))


# --- boundary curve sampling -------------------------------------------------

CURVE_IDS = (
    "c1", "c2", "c3",
    "s1", "s2", "s3",
    "r1", "r2", "r3",
    "omega", "lambda", "scalar",
)
EXTRA_CURVE_IDS = ("kahler",)


def _w2_coefficients(space: SpaceParams, curve_id: str, w1: float) -> tuple[float, float, float]:
    """Coefficients ``(A, B, C)`` of the curve equation ``A w2^2 + B w2 + C = 0``."""
    a = space.a
    x = w1
    table = {
        "s1": (x * x + 2 * x - 3, -2 * x * x + 2 * x, x * x),
        "s2": (x * x - 2 * x + 1, 2 * x * x + 2 * x, -3 * x * x),
        "s3": (-3 * x * x + 2 * x + 1, 2 * x * x - 2 * x, x * x),
        "r1": (a - a * x * x, x * x, -a * x * x),
        "r2": (-a * x * x - a + x, 0.0, a * x * x),
        "r3": (a * x * x - a, x, -a * x * x),
        "scalar": (a * x * x + a - x, -(x * x + x), a * x * x),
        "omega": (0.0, -2 * a * (x + 1), x),
        "lambda": (0.0, 1 - 2 * a * x, -2 * a * x),
        "c1": (0.0, 1.0, -1.0),
        "c3": (0.0, 1.0, -x),
        # w1 + w2 - w1 w2 = 0, i.e. 1/w1 + 1/w2 = 1
        "kahler": (0.0, 1 - x, x),
    }
    try:
        return table[curve_id]
    except KeyError:
        raise ValueError(f"unknown curve {curve_id!r}") from None


def curve_residual(space: SpaceParams, curve_id: str, p: PhasePoint) -> float:
    """Defining polynomial of a curve; zero on the curve."""
    if curve_id == "c2":
        return p.w1 - 1.0
    A, B, C = _w2_coefficients(space, curve_id, p.w1)
    return (A * p.w2 + B) * p.w2 + C


def curve_roots(space: SpaceParams, curve_id: str, w1: float) -> list[float]:
    """All positive ``w2`` with ``(w1, w2)`` on the curve, ascending and polished."""
    A, B, C = _w2_coefficients(space, curve_id, w1)
    return sorted(_polish(A, B, C, z) for z in _positive_roots(A, B, C))


def _positive_roots(A: float, B: float, C: float) -> list[float]:
    if A == 0.0:
        if B == 0.0:
            return []
        roots = [-C / B]
    else:
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return []
        qq = -0.5 * (B + math.copysign(math.sqrt(disc), B))
        roots = [qq / A]
        if qq != 0.0:
            roots.append(C / qq)
    return sorted(r for r in roots if r > 0.0 and math.isfinite(r))


def _polish(A: float, B: float, C: float, z: float) -> float:
    for _ in range(2):
        deriv = 2.0 * A * z + B
        if deriv == 0.0:
            break
        step = ((A * z + B) * z + C) / deriv
        if not math.isfinite(step) or z - step <= 0.0:
            break
        z -= step
    return z


@dataclass
class CurveSample:
    curve_id: str
    w1: np.ndarray
    w2: np.ndarray
    residuals: np.ndarray
    missing: list[float] = field(default_factory=list)

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(float(u), float(v)) for u, v in zip(self.w1, self.w2)]

    def __len__(self) -> int:
        return len(self.w1)


def sample_boundary_curve(
    space: SpaceParams,
    curve_id: str,
    w1_range: tuple[float, float],
    count: int,
    branch: str = "upper",
    spacing: str = "linear",
) -> CurveSample:
    """Sample a w-plane curve as ``w2(w1)`` over ``w1_range``.

    Each defining equation is at most quadratic in ``w2``. At the first
    abscissa the largest (``branch="upper"``) or smallest (``"lower"``)
    positive root is taken; afterwards the root closest to the previous one is
    followed. Abscissae without a positive root are listed in ``missing`` and
    restart the branch choice. For ``c2`` (the line ``w1 = 1``) the range is
    read as a ``w2`` range.
    """
    if branch not in ("upper", "lower"):
        raise ValueError("branch must be 'upper' or 'lower'")
    lo, hi = w1_range
    if spacing == "log":
        xs = np.geomspace(lo, hi, count)
    else:
        xs = np.linspace(lo, hi, count)
    if curve_id == "c2":
        return CurveSample(curve_id, np.ones_like(xs), xs, np.zeros_like(xs))

    out_w1, out_w2, res, missing = [], [], [], []
    prev = None
    for x in xs:
        x = float(x)
        A, B, C = _w2_coefficients(space, curve_id, x)
        roots = _positive_roots(A, B, C)
        if not roots:
            missing.append(x)
            prev = None
            continue
        if prev is None:
            z = roots[-1] if branch == "upper" else roots[0]
        else:
            z = min(roots, key=lambda r: abs(math.log(r / prev)))
        z = _polish(A, B, C, z)
        prev = z
        out_w1.append(x)
        out_w2.append(z)
        res.append((A * z + B) * z + C)
    return CurveSample(curve_id, np.array(out_w1), np.array(out_w2), np.array(res), missing)


# --- submersion family -------------------------------------------------------


def scalar_along_submersion(space: SpaceParams, x: float) -> float:
    return scalar_curvature(space, submersion_metric(x))


def submersion_critical_points(
    space: SpaceParams,
    x_range: tuple[float, float] = (0.2, 6.0),
    count: int = 2000,
    tol: float = 1e-10,
) -> list[tuple[float, str]]:
    """Critical points of ``S`` along ``(x^-1/3, x^-1/3, x^2/3)``.

    Located by sign changes of a central-difference derivative, refined by
    bisection. Returns ``(x, "min" | "max")`` pairs.
    """

    def deriv(x: float) -> float:
        h = 1e-6 * x
        return (scalar_along_submersion(space, x + h) - scalar_along_submersion(space, x - h)) / (2 * h)

    xs = np.geomspace(x_range[0], x_range[1], count)
    ds = [deriv(float(x)) for x in xs]
    found = []
    for i in range(len(xs) - 1):
        if ds[i] == 0.0 or ds[i] * ds[i + 1] < 0:
            lo, hi, dlo = float(xs[i]), float(xs[i + 1]), ds[i]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                dm = deriv(mid)
                if (dm < 0) == (dlo < 0):
                    lo, dlo = mid, dm
                else:
                    hi = mid
            kind = "min" if ds[i] < 0 else "max"
            found.append((0.5 * (lo + hi), kind))
    return found
