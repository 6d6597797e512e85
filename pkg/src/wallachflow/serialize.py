"""Deterministic JSON and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from fractions import Fraction

import numpy as np

from .space import Metric3, PhasePoint, SpaceParams

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (PhasePoint, Metric3)):
        return [to_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating, Fraction)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def envelope(space: SpaceParams | None, payload) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "space": None if space is None else {"a": space.a, "d": space.d},
        "payload": to_jsonable(payload),
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def trajectory_csv(t: np.ndarray, y: np.ndarray, columns: tuple[str, ...]) -> str:
    """CSV with a ``t,...`` header and 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t",) + columns)
    for tk, yk in zip(t, y):
        w.writerow([f"{float(tk):.17g}"] + [f"{float(v):.17g}" for v in yk])
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
