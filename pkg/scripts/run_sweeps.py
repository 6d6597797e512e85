"""Exit and no-return sweeps over D and R for the Wallach spaces."""

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from wallachflow.serialize import dumps, envelope
from wallachflow.space import make_space
from wallachflow.sweep import SweepSpec, run_sweep


@dataclass(frozen=True)
class Config:
    grid: tuple[int, int] = (10, 10)
    horizon: float = 100.0
    jobs: int | None = None
    out: Path = Path("results/sweeps")


CASES = [("D", "1/9"), ("D", "1/8"), ("D", "1/6"), ("R", "1/9"), ("R", "1/8"), ("R", "0.1")]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="10x10")
    ap.add_argument("--horizon", type=float, default=100.0)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Config.out)
    ns = ap.parse_args()
    cfg = Config(tuple(int(v) for v in ns.grid.split("x")), ns.horizon, ns.jobs, ns.out)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for region, a in CASES:
        s = make_space(a)
        res = run_sweep(SweepSpec(s, region, cfg.grid, horizon=cfg.horizon), jobs=cfg.jobs)
        name = f"{region}_a{a.replace('/', '-')}"
        (cfg.out / f"{name}.json").write_text(dumps(envelope(s, {"records": res.records, "summary": res.summary})))
        print(name, json.dumps(res.summary, sort_keys=True))


if __name__ == "__main__":
    main()
