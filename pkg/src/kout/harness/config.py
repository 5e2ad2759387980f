"""Experiment configs: a flat JSON object whose list-valued grid keys span a
cartesian grid of cells.

Example::

    {"experiment": "intercomponent", "family": "leafy_tree",
     "n": [512, 1024], "k": [8, 16], "model": "k-out",
     "trials": 1000, "seed": 7, "out": "results/intercomponent.csv"}

Coupled grids can list explicit ``"cells": [{"n": 256, "k": 16}, ...]`` instead.
Keys that are neither fields nor grid axes become experiment parameters.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from kout.errors import BadParameters

GRID_KEYS = ("n", "k", "p", "r", "c", "d")
EXPERIMENTS = (
    "intercomponent", "tail", "sandwich", "connectivity", "psample_compare",
    "almost_regular", "protocol", "alt_protocol", "mapreduce",
)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    family: str
    grid: tuple[dict, ...]
    trials: int
    master_seed: int
    models: tuple[str, ...] = ("k-out",)
    out: str | None = None
    params: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise BadParameters(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise BadParameters("trials must be >= 1")
        if not self.grid:
            raise BadParameters("grid must be nonempty")
        if self.master_seed is None:
            raise BadParameters("a seed is mandatory")

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def from_mapping(doc: dict) -> ExperimentConfig:
    doc = dict(doc)
    try:
        experiment = doc.pop("experiment")
        family = doc.pop("family")
        trials = int(doc.pop("trials"))
    except KeyError as exc:
        raise BadParameters(f"config is missing {exc.args[0]!r}") from None
    if "seed" in doc:
        seed = doc.pop("seed")
    elif "master_seed" in doc:
        seed = doc.pop("master_seed")
    else:
        raise BadParameters("config is missing 'seed'")
    models = doc.pop("models", None) or doc.pop("model", None) or "k-out"
    out = doc.pop("out", None)
    workers = int(doc.pop("workers", 1))
    if "cells" in doc:
        # explicit cells, for grids whose axes are coupled (e.g. k depending on n)
        grid = tuple(dict(c) for c in doc.pop("cells"))
        if any("n" not in c for c in grid):
            raise BadParameters("every cell needs 'n'")
    else:
        axes = [(key, _as_list(doc.pop(key))) for key in GRID_KEYS if key in doc]
        if not axes or any(not vals for _, vals in axes):
            raise BadParameters("config needs at least one nonempty grid axis (e.g. 'n')")
        names = [k for k, _ in axes]
        grid = tuple(dict(zip(names, combo))
                     for combo in itertools.product(*(v for _, v in axes)))
    return ExperimentConfig(
        experiment=experiment, family=family, grid=grid, trials=trials,
        master_seed=int(seed), models=tuple(_as_list(models)), out=out,
        params=doc, workers=workers,
    )


def load_config(path) -> ExperimentConfig:
    with open(Path(path), encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise BadParameters("config must be a JSON object")
    return from_mapping(doc)
