"""Tangency point Q on r1 for the three Wallach spaces, against the reference values."""

import argparse
import math

from wallachflow.checks import REFERENCE_Q_POINTS
from wallachflow.curvature import rho_residuals
from wallachflow.equilibria import param_r1, q_point, transversality_r1
from wallachflow.space import PhasePoint, make_space


def main() -> None:
    argparse.ArgumentParser(description=__doc__).parse_args()
    w12 = make_space("1/8")
    print(f"{'a':>4} {'t*':>14} {'w1*':>14} {'w2*':>14} {'rho1(ref)':>11} {'ref via a=1/8':>26}")
    for a, (t_ref, w1_ref, w2_ref) in REFERENCE_Q_POINTS.items():
        s = make_space(a)
        rep = q_point(s)
        rho_ref = rho_residuals(s, PhasePoint(w1_ref, w2_ref))[0]
        alt = param_r1(w12, rep.t_star)
        print(
            f"{a:>4} {rep.t_star:14.10f} {rep.q_point.w1:14.10f} {rep.q_point.w2:14.10f} "
            f"{rho_ref:11.4g} ({alt.w1:.9f}, {alt.w2:.8f})"
        )
        lo, hi = transversality_r1(s, rep.t_star - 0.01), transversality_r1(s, rep.t_star + 0.01)
        print(f"     sign of (V, grad rho1) at t* -/+ 0.01: {lo.sign:+d} / {hi.sign:+d}")
    print(f"closed form at a=1/6: 1 - sqrt(10)/4 = {1 - math.sqrt(10) / 4:.15f}")


if __name__ == "__main__":
    main()
