"""Finite unions of closed real intervals.

All continuous (Lebesgue-backed) measures in this package live on finite
unions of disjoint closed intervals of finite total length.  The union is
canonicalized at construction: intervals are sorted by left endpoint and
touching or overlapping intervals are merged, so boundary overlap of
measure zero never survives construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntervalUnion:
    """A canonical finite union of disjoint closed intervals ``[a, b]``, a < b."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        merged = _canonicalize(self.intervals)
        object.__setattr__(self, "intervals", merged)

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def hull(self) -> tuple[float, float]:
        if self.is_empty:
            raise ValueError("empty interval union has no hull")
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, x):
        """Vectorized membership test (closed intervals)."""
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (x >= a) & (x <= b)
        return inside

    def translate(self, t: float) -> "IntervalUnion":
        return IntervalUnion(tuple((a + t, b + t) for a, b in self.intervals))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        pieces = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    pieces.append((lo, hi))
        return IntervalUnion(tuple(pieces))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def minkowski_sum(self, other: "IntervalUnion") -> "IntervalUnion":
        pieces = [
            (a + c, b + d)
            for a, b in self.intervals
            for c, d in other.intervals
        ]
        return IntervalUnion(tuple(pieces))

    def __iter__(self):
        return iter(self.intervals)


def as_interval_union(spec) -> IntervalUnion:
    """Coerce ``(a, b)``, ``[(a, b), ...]`` or an IntervalUnion to IntervalUnion."""
    if isinstance(spec, IntervalUnion):
        return spec
    seq = list(spec)
    if len(seq) == 2 and all(np.isscalar(v) for v in seq):
        seq = [tuple(seq)]
    return IntervalUnion(tuple((float(a), float(b)) for a, b in seq))


def _canonicalize(intervals) -> tuple[tuple[float, float], ...]:
    cleaned = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError(f"interval endpoints must be finite, got ({a}, {b})")
        if b <= a:
            # zero-length or inverted pieces are dropped; they carry no mass
            continue
        cleaned.append((a, b))
    cleaned.sort()
    merged: list[list[float]] = []
    for a, b in cleaned:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)
