"""Confidence intervals used when aggregating Monte Carlo outcomes."""

import numpy as np
from scipy import stats


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return (float("nan"), float("nan"))
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == n else min(1.0, centre + half)
    return (low, high)


def mean_interval(values, confidence: float = 0.95) -> tuple[float, float, float]:
    """Sample mean with a normal-approximation interval: (mean, low, high)."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return (float("nan"), float("nan"), float("nan"))
    mean = float(x.mean())
    if x.size == 1:
        return (mean, mean, mean)
    half = stats.norm.ppf(0.5 + confidence / 2.0) * stats.sem(x)
    if not np.isfinite(half):
        half = 0.0
    return (mean, mean - float(half), mean + float(half))
