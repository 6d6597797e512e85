"""SVG phase portraits (w-plane and simplex) for the Wallach spaces."""

import argparse
from pathlib import Path

from wallachflow.portrait import PortraitSpec, build_portrait, render_svg
from wallachflow.space import make_space


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/portraits"))
    ap.add_argument("--density", type=int, default=400)
    ns = ap.parse_args()
    ns.out.mkdir(parents=True, exist_ok=True)
    for a in ("1/9", "1/8", "1/6"):
        for mode in ("w", "simplex"):
            bundle = build_portrait(make_space(a), PortraitSpec(density=ns.density, mode=mode))
            path = ns.out / f"a{a.replace('/', '-')}_{mode}.svg"
            path.write_text(render_svg(bundle))
            print(path, *bundle["warnings"])


if __name__ == "__main__":
    main()
