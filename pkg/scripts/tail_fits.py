"""Fitted tail exponents of w2 against w1 - 1, compared with (1 - 2a)/(4a)."""

import argparse

from wallachflow.asymptotics import InsufficientTailError, fit_tail_exponent, integrate_tail, predicted_exponent
from wallachflow.integrator import IntegrationOptions
from wallachflow.space import make_space

A_VALUES = ("1/9", "1/8", "1/6", "0.2", "0.3")
STARTS = ((1.5, 2.0), (1.05, 3.0), (2.0, 10.0))
THRESHOLDS = (1e-3, 1e-4, 1e-5)


def main() -> None:
    argparse.ArgumentParser(description=__doc__).parse_args()
    opts = IntegrationOptions(state_bounds=(1e-12, 1e14), t_max=1e3)
    print(f"{'a':>5} {'alpha':>7} {'start':>12} " + " ".join(f"{'fit@' + format(t, 'g'):>10}" for t in THRESHOLDS))
    for a in A_VALUES:
        s = make_space(a)
        for start in STARTS:
            tr = integrate_tail(s, start, until=1e-6, opts=opts)
            cells = []
            for thr in THRESHOLDS:
                try:
                    cells.append(f"{fit_tail_exponent(tr, thr).alpha_hat:10.5f}")
                except InsufficientTailError:
                    cells.append(f"{'-':>10}")
            print(f"{a:>5} {predicted_exponent(s):7.4f} {str(start):>12} " + " ".join(cells))


if __name__ == "__main__":
    main()
