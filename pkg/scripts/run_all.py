"""Run every experiment config in scripts/configs, write CSVs and SVG plots.

    python3 scripts/run_all.py [--only NAME ...] [--results DIR] [--workers N]

Exits 1 if any threshold check fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from kout.harness.config import load_config
from kout.harness.experiments import run_experiment
from kout.harness.plot import PlotSpec, plot

HERE = Path(__file__).resolve().parent
CONFIGS = HERE / "configs"

PLOTS = {
    "intercomponent": PlotSpec("k", "mean", "n", "inter-component edges, leafy tree"),
    "sandwich": PlotSpec("n", "mean", "label", "sandwich: X_2k, Y_k, X_k/2"),
    "tail": PlotSpec("ell", "tail", "n", "tail of X beyond ell * b * n / k"),
    "connectivity": PlotSpec("c", "connected_rate", "n", "connected rate, circulant"),
    "psample_grid": PlotSpec("n", "mean_psample", "experiment", "p-sample on clique plus cliques"),
    "almost_regular": PlotSpec("n", "mean", "r", "p-sample on almost regular graphs"),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", nargs="+")
    ap.add_argument("--results", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    out_dir = Path(args.results)
    failed = False
    for path in sorted(CONFIGS.glob("*.json")):
        name = path.stem
        if args.only and name not in args.only:
            continue
        cfg = load_config(path)
        csv_path = out_dir / f"{name}.csv"
        cfg = dataclasses.replace(cfg, out=str(csv_path), workers=args.workers)
        t0 = time.perf_counter()
        res = run_experiment(cfg)
        print(f"== {name}: {len(res.rows)} rows in {time.perf_counter() - t0:.1f}s")
        for check in res.checks:
            print("  " + check.line())
        failed |= not res.ok
        if name in PLOTS:
            svg = plot(csv_path.read_text(encoding="utf-8"), PLOTS[name])
            (out_dir / f"{name}.svg").write_text(svg, encoding="utf-8", newline="\n")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
