"""Uncertainty conventions used for reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def binomial_sigma(p: float, n: int) -> float:
    """Standard error sqrt(p (1 - p) / n) of a rate measured over n trials."""
    if n < 1:
        raise ValueError("binomial sigma needs n >= 1")
    p = min(1.0, max(0.0, float(p)))
    return math.sqrt(p * (1.0 - p) / n)


def ensemble_sigma(values) -> float:
    """Standard error of the mean over replicates: SD / sqrt(count).

    SD is the population standard deviation (ddof = 0), so the replicate set
    {0.4, 0.6} has SD 0.1 and sigma 0.0707.
    """
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValueError("ensemble sigma needs at least one value")
    return float(v.std() / math.sqrt(v.size))


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sigma: float
    count: int
    kind: str  # "binomial" or "ensemble"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.kind not in ("binomial", "ensemble"):
            raise ValueError("kind must be 'binomial' or 'ensemble'")
