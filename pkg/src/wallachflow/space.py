"""Space parameters, invariant metrics and the coordinate changes between them.

A generalized Wallach space with ``a_1 = a_2 = a_3 = a`` and three isotropy
modules of equal dimension ``d`` is represented by :class:`SpaceParams`.
Diagonal invariant metrics are :class:`Metric3` values ``(x1, x2, x3)`` and the
homothety classes of metrics are :class:`PhasePoint` values
``(w1, w2) = (x3/x1, x3/x2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

Number = Union[int, float, Fraction, str]

WALLACH_PRESETS = {
    "W6": (Fraction(1, 6), 2),
    "W12": (Fraction(1, 8), 4),
    "W24": (Fraction(1, 9), 8),
}

DEGENERATE_A = 0.25
_PRESET_TOL = 1e-12


class SpaceParamsError(ValueError):
    """Raised for parameters outside 0 < a < 1/2, d >= 1."""


@dataclass(frozen=True)
class SpaceParams:
    a: float
    d: int

    @property
    def n(self) -> int:
        """Manifold dimension ``3 d``."""
        return 3 * self.d

    @property
    def degenerate(self) -> bool:
        # at a = 1/4 all four equilibria collapse to (1, 1)
        return abs(self.a - DEGENERATE_A) <= _PRESET_TOL

    @property
    def q(self) -> float:
        return 2.0 * self.a / (1.0 - 2.0 * self.a)

    @property
    def preset(self) -> str | None:
        """Name of the Wallach space with this ``a``, if any."""
        for name, (a, _) in WALLACH_PRESETS.items():
            if abs(self.a - float(a)) <= _PRESET_TOL:
                return name
        return None

    @property
    def is_wallach(self) -> bool:
        return self.preset is not None


def parse_number(value: Number) -> float:
    """Convert ints, floats, Fractions or strings such as ``"1/8"`` to float.

    Strings go through :class:`fractions.Fraction` first so that ``"1/9"`` is
    rounded once, from the exact rational.
    """
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpaceParamsError(f"cannot parse number {value!r}") from exc
    return float(value)


def make_space(a: Number, d: int = 1) -> SpaceParams:
    a_val = parse_number(a)
    if not (0.0 < a_val < 0.5):
        raise SpaceParamsError(f"a must satisfy 0 < a < 1/2, got {a_val!r}")
    if isinstance(d, bool) or int(d) != d or int(d) < 1:
        raise SpaceParamsError(f"d must be a positive integer, got {d!r}")
    return SpaceParams(a=a_val, d=int(d))


def wallach_space(name: str) -> SpaceParams:
    """One of ``"W6"``, ``"W12"``, ``"W24"``."""
    a, d = WALLACH_PRESETS[name]
    return make_space(a, d)


@dataclass(frozen=True)
class Metric3:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for v in (self.x1, self.x2, self.x3):
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"metric components must be positive and finite: {self}")

    def __iter__(self) -> Iterator[float]:
        return iter((self.x1, self.x2, self.x3))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.x3)

    def scaled(self, c: float) -> "Metric3":
        return Metric3(c * self.x1, c * self.x2, c * self.x3)

    @property
    def volume(self) -> float:
        return self.x1 * self.x2 * self.x3


@dataclass(frozen=True)
class PhasePoint:
    w1: float
    w2: float

    def __post_init__(self):
        for v in (self.w1, self.w2):
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"phase coordinates must be positive and finite: {self}")

    def __iter__(self) -> Iterator[float]:
        return iter((self.w1, self.w2))

    def as_tuple(self) -> tuple[float, float]:
        return (self.w1, self.w2)


def to_scale_invariant(m: Metric3) -> PhasePoint:
    return PhasePoint(m.x3 / m.x1, m.x3 / m.x2)


def from_scale_invariant(p: PhasePoint) -> Metric3:
    return Metric3(1.0 / p.w1, 1.0 / p.w2, 1.0)


def normalize_volume(m: Metric3) -> Metric3:
    c = m.volume ** (-1.0 / 3.0)
    return m.scaled(c)


def submersion_metric(x: float) -> Metric3:
    """Unit-volume metric ``(x^-1/3, x^-1/3, x^2/3)``; ``x = 1`` is normal."""
    if not x > 0.0:
        raise ValueError("x must be positive")
    s = x ** (-1.0 / 3.0)
    return Metric3(s, s, x ** (2.0 / 3.0))


# --- module permutations ---------------------------------------------------


@dataclass(frozen=True)
class SymmetryElement:
    """Relabelling of the modules: the new ``x_i`` is the old ``x_perm[i]``.

    Indices are 0-based.
    """

    perm: tuple[int, int, int]

    def __post_init__(self):
        if sorted(self.perm) != [0, 1, 2]:
            raise ValueError(f"not a permutation of (0, 1, 2): {self.perm}")

    def apply_metric(self, m: Metric3) -> Metric3:
        x = m.as_tuple()
        return Metric3(*(x[i] for i in self.perm))

    def apply(self, p: PhasePoint) -> PhasePoint:
        return to_scale_invariant(self.apply_metric(from_scale_invariant(p)))

    def compose(self, other: "SymmetryElement") -> "SymmetryElement":
        """``self.compose(other)`` applies ``other`` first, then ``self``."""
        return SymmetryElement(tuple(other.perm[i] for i in self.perm))

    def inverse(self) -> "SymmetryElement":
        inv = [0, 0, 0]
        for i, j in enumerate(self.perm):
            inv[j] = i
        return SymmetryElement(tuple(inv))

    @property
    def is_identity(self) -> bool:
        return self.perm == (0, 1, 2)


IDENTITY = SymmetryElement((0, 1, 2))
SYMMETRY_GROUP: tuple[SymmetryElement, ...] = (
    IDENTITY,
    SymmetryElement((1, 0, 2)),
    SymmetryElement((2, 1, 0)),
    SymmetryElement((0, 2, 1)),
    SymmetryElement((1, 2, 0)),
    SymmetryElement((2, 0, 1)),
)


def in_omega(p: PhasePoint, closed: bool = False) -> bool:
    if closed:
        return p.w2 >= p.w1 >= 1.0
    return p.w2 > p.w1 > 1.0


def canonicalize_to_omega(p: PhasePoint) -> tuple[PhasePoint, SymmetryElement]:
    """Orbit representative in the closure of ``w2 > w1 > 1``.

    The representative is the candidate with lexicographically smallest
    ``(w1, w2)``; among exact duplicates the first element of
    :data:`SYMMETRY_GROUP` wins.
    """
    best = None
    for g in SYMMETRY_GROUP:
        image = g.apply(p)
        if not in_omega(image, closed=True):
            continue
        if best is None or image.as_tuple() < best[0].as_tuple():
            best = (image, g)
    # the sorting permutation always lands in the closed domain
    assert best is not None
    return best


def orbit(p: PhasePoint, rel_tol: float = 1e-12) -> list[PhasePoint]:
    """Distinct images of ``p`` under the six module permutations."""
    points: list[PhasePoint] = []
    for g in SYMMETRY_GROUP:
        q = g.apply(p)
        if not any(
            math.isclose(q.w1, r.w1, rel_tol=rel_tol) and math.isclose(q.w2, r.w2, rel_tol=rel_tol)
            for r in points
        ):
            points.append(q)
    return points
