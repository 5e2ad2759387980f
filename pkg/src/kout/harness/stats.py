from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Summary:
    trials: int
    mean: float
    variance: float
    se: float
    p50: float
    p90: float
    p99: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean, "variance": self.variance, "se": self.se,
            "p50": self.p50, "p90": self.p90, "p99": self.p99, "min": self.min, "max": self.max,
        }


def summarize(values) -> Summary:
    """Sample statistics; the variance is the unbiased (ddof=1) estimator."""
    x = np.asarray(values, dtype=np.float64)
    t = len(x)
    if t == 0:
        raise ValueError("no trials to summarize")
    var = float(x.var(ddof=1)) if t > 1 else 0.0
    q50, q90, q99 = np.quantile(x, [0.5, 0.9, 0.99])
    return Summary(t, float(x.mean()), var, math.sqrt(var / t), float(q50), float(q90),
                   float(q99), float(x.min()), float(x.max()))


def proportion_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def combined_se(*ses: float) -> float:
    return math.sqrt(sum(s * s for s in ses))


def spread(values) -> float:
    """max / min of positive values (inf if any is zero)."""
    v = [float(x) for x in values]
    lo = min(v)
    return math.inf if lo <= 0 else max(v) / lo


def fmt(x) -> str:
    """Deterministic CSV rendering of numbers."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return format(x, ".10g")
    return "" if x is None else str(x)
