"""Similarity between a page-view series and a search-frequency series.

Two measures are provided: the Pearson product-moment correlation and the
up/down concordance rate (UDCR), the share of consecutive steps on which both
series move the same way.  Flat steps count as moves: a step that is flat in
both series is concordant, which inflates UDCR on mostly-zero series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InternalConsistencyError, MetricInputError
from .timeseries import TimeSeries, align

# Floating drift tolerated beyond |r| = 1 before it is treated as a bug.
CLAMP_TOLERANCE = 1e-12


def _sign(d) -> int:
    return (d > 0) - (d < 0)


def sign_delta(x: Sequence) -> list[int]:
    """Direction of each step: ``+1`` up, ``0`` flat, ``-1`` down (length n-1)."""
    if len(x) < 2:
        raise MetricInputError(f"need at least 2 values, got {len(x)}")
    return [_sign(b - a) for a, b in zip(x, x[1:])]


def _check_pair(x: Sequence, y: Sequence) -> int:
    n = len(x)
    if n != len(y):
        raise MetricInputError(f"series lengths differ: {n} vs {len(y)}")
    if n < 2:
        raise MetricInputError(f"need at least 2 aligned values, got {n}")
    return n


def udcr(x: Sequence, y: Sequence) -> float:
    """Up/down concordance rate of two equal-length series, in [0, 1]."""
    n = _check_pair(x, y)
    matches = sum(a == b for a, b in zip(sign_delta(x), sign_delta(y)))
    return matches / (n - 1)


def pearson(x: Sequence, y: Sequence) -> float | None:
    """Pearson correlation, or ``None`` when either series is constant.

    Two-pass: centre on the means first, then accumulate the centred products
    with ``math.fsum`` so large offsets do not cancel catastrophically.
    """
    n = _check_pair(x, y)
    if all(v == x[0] for v in x) or all(v == y[0] for v in y):
        return None
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        # non-constant input whose spread vanished in floating point
        return None
    r = sxy / (math.sqrt(sxx) * math.sqrt(syy))
    if abs(r) > 1:
        if abs(r) - 1 > CLAMP_TOLERANCE:
            raise InternalConsistencyError(f"pearson r = {r!r} outside [-1, 1]")
        r = math.copysign(1.0, r)
    return r


@dataclass(frozen=True)
class MetricResult:
    n: int
    pearson: float | None
    udcr: float

    @property
    def pearson_defined(self) -> bool:
        return self.pearson is not None


def score_values(x: Sequence, y: Sequence) -> MetricResult:
    return MetricResult(_check_pair(x, y), pearson(x, y), udcr(x, y))


def score_pair(x: TimeSeries, y: TimeSeries) -> MetricResult:
    """Align two series on their common span and compute both measures."""
    xa, ya = align(x, y)
    return score_values(xa.values, ya.values)
