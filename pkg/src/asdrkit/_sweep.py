"""Shared interval plumbing for the sweep-line consumers (tick units)."""

from __future__ import annotations

import numpy as np


def merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Union of intervals; abutting ones merge."""
    if not intervals:
        return []
    intervals = sorted(intervals)
    out = [intervals[0]]
    for on, off in intervals[1:]:
        if on <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], off))
        else:
            out.append((on, off))
    return out


def overlap_ticks(a: list[tuple[int, int]], b: list[tuple[int, int]]) -> int:
    """Total intersection length of two sorted disjoint interval lists."""
    i = j = total = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return total


def cover(points: np.ndarray, intervals: list[tuple[int, int]]) -> np.ndarray:
    """Coverage mask over the elementary intervals between consecutive
    points; every interval endpoint must be one of the points."""
    mask = np.zeros(len(points) - 1, dtype=bool)
    for on, off in intervals:
        lo = int(np.searchsorted(points, on))
        hi = int(np.searchsorted(points, off))
        mask[lo:hi] = True
    return mask
