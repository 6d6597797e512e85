"""Ratio of the closed-form two-variable system to the restricted 3D field."""

import argparse

import numpy as np

from wallachflow.fields import reduced_factor
from wallachflow.space import make_space


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args()
    rng = np.random.default_rng(ns.seed)
    for a in ("1/9", "1/8", "1/6", "0.3"):
        s = make_space(a)
        xs = np.exp(rng.normal(scale=0.5, size=(ns.samples, 2)))
        r = np.array([reduced_factor(s, x1, x2) for x1, x2 in xs])
        r = r[np.isfinite(r)]
        print(f"a={a:>4}: factor min {r.min():.15f} max {r.max():.15f} over {len(r)} points")


if __name__ == "__main__":
    main()
