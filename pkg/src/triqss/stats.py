"""Small statistics helpers shared by the protocol checks and the harness."""

from __future__ import annotations

import math

# Two-sided 95% normal quantile.
Z_95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Returns the trivial interval ``(0, 1)`` when there are no trials, so
    callers never divide by zero on empty slices.
    """
    if trials < 0 or successes < 0 or successes > trials:
        raise ValueError(f"bad binomial counts: {successes}/{trials}")
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def ratio(numerator: int, denominator: int) -> float:
    """``numerator / denominator`` with 0/0 defined as 0."""
    if denominator == 0:
        return 0.0
    return numerator / denominator
