"""``kout`` command line: sample, experiment, protocol, mapreduce, plot.

Exit codes: 0 success, 1 a threshold check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from kout import rng as _rng
from kout.connectivity import components, inter_component_edges
from kout.errors import KoutError
from kout.harness.config import ExperimentConfig, from_mapping, load_config
from kout.harness.experiments import run_experiment
from kout.harness.families import build
from kout.harness.plot import PlotSpec, plot
from kout.mapreduce import trace_csv

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _add_inline(p: argparse.ArgumentParser, *extra: str) -> None:
    p.add_argument("--config", help="JSON config file (overrides inline flags)")
    p.add_argument("--family")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--family-k", type=int, help="construction parameter of the family")
    for name in extra:
        p.add_argument(f"--{name}", type=float, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kout", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one sample and write its edge list")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=float, required=True, help="k, or p for p-sample")
    p.add_argument("--model", default="k-out",
                   choices=("k-out", "expected-k-out", "p-sample"))
    p.add_argument("--family-k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--p", type=float, help="edge probability of the gnp family")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment to CSV")
    p.add_argument("--experiment")
    p.add_argument("--model", nargs="+")
    _add_inline(p, "p", "r", "c", "d")

    p = sub.add_parser("protocol", help="run the one-way sketch protocol")
    p.add_argument("--alt", action="store_true", help="multi-round variant")
    p.add_argument("--scheme", choices=("bch", "random"), default="bch")
    _add_inline(p, "r", "c")

    p = sub.add_parser("mapreduce", help="simulate the four-round algorithm")
    p.add_argument("--budget", type=int)
    p.add_argument("--trace", help="write the per-machine trace of trial 0 here")
    _add_inline(p)

    p = sub.add_parser("plot", help="log-log SVG of two CSV columns")
    p.add_argument("csv")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--group")
    p.add_argument("--title", default="")
    p.add_argument("--out")
    return ap


def _inline_doc(args, experiment: str) -> dict:
    doc = {"experiment": experiment, "family": args.family, "trials": args.trials,
           "seed": args.seed, "out": args.out, "workers": args.workers}
    for key in ("n", "k", "p", "r", "c", "d"):
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = [int(v) if float(v).is_integer() and key != "p" else v for v in val]
    if getattr(args, "model", None):
        doc["models"] = args.model
    if getattr(args, "family_k", None) is not None:
        doc["family_k"] = args.family_k
    if getattr(args, "budget", None) is not None:
        doc["budget"] = args.budget
    if getattr(args, "scheme", None):
        doc["scheme_kind"] = args.scheme
    missing = [k for k in ("family", "trials", "seed") if doc.get(k) is None]
    if missing:
        raise KoutError("missing " + ", ".join("--" + m for m in missing) + " (or use --config)")
    return {k: v for k, v in doc.items() if v is not None}


def _config(args, experiment: str | None) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
        if args.out:
            cfg = dataclasses.replace(cfg, out=args.out)
        return cfg
    if experiment is None:
        raise KoutError("--experiment is required without --config")
    return from_mapping(_inline_doc(args, experiment))


def _report(res, cfg: ExperimentConfig) -> int:
    if not cfg.out:
        sys.stdout.write(res.to_csv())
    for c in res.checks:
        print(c.line(), file=sys.stderr)
    return EXIT_OK if res.ok else EXIT_VIOLATION


def cmd_sample(args) -> int:
    from kout.sampling import sample
    fk = args.family_k if args.family_k is not None else int(args.k)
    g = build(args.family, args.n, k=fk, d=args.d, r=args.r, p=args.p, seed=args.seed).graph
    param = args.k if args.model == "p-sample" else int(args.k)
    s = sample(g, args.model, param, _rng.RngStream(args.seed))
    part = components(g.n, s.edges)
    count, _ = inter_component_edges(g, part)
    lines = [str(g.n)] + [f"{u} {v}" for u, v in sorted(s.edges)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii", newline="\n")
    else:
        sys.stdout.write(text)
    print(f"edges={len(s)} components={part.component_count} inter_component={count}",
          file=sys.stderr)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _config(args, args.experiment)
    return _report(run_experiment(cfg), cfg)


def cmd_protocol(args) -> int:
    cfg = _config(args, "alt_protocol" if args.alt else "protocol")
    return _report(run_experiment(cfg), cfg)


def cmd_mapreduce(args) -> int:
    cfg = _config(args, "mapreduce")
    code = _report(run_experiment(cfg), cfg)
    if args.trace:
        from kout.mapreduce import simulate
        cell = cfg.grid[0]
        n, k = int(cell["n"]), int(cell["k"])
        g = build(cfg.family, n, k=int(cfg.param("family_k", k)),
                  seed=int(cfg.param("graph_seed", cfg.master_seed))).graph
        budget = int(cfg.param("budget", cfg.param("budget_factor", 4) * n * k))
        _, traces = simulate(g, k, budget, _rng.trial_seed(cfg.master_seed, 0))
        Path(args.trace).write_text(trace_csv(traces), encoding="ascii", newline="\n")
    return code


def cmd_plot(args) -> int:
    text = Path(args.csv).read_text(encoding="utf-8")
    svg = plot(text, PlotSpec(args.x, args.y, args.group, args.title))
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "experiment": cmd_experiment, "protocol": cmd_protocol,
            "mapreduce": cmd_mapreduce, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (KoutError, OSError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"kout: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
