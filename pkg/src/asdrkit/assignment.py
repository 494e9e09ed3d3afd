"""Minimum-cost bipartite assignment plus an exhaustive oracle.

Shared engine for DER speaker mapping, cpCER permutation search and
fusion label mapping.  ``solve_min_cost`` runs a shortest-augmenting-path
Kuhn-Munkres; ``brute_force`` enumerates every matching and exists so the
fast path can be checked against it.  Both return a full matching of the
smaller side (the zero-cost-dummy-padding convention for rectangular
matrices).  Maximisation problems negate their costs at the call site.

Equal-cost optima are not unique; callers may rely on ``total_cost`` and
on deterministically re-sorted ``pairs``, nothing else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._kernels import hungarian

__all__ = ["Assignment", "solve_min_cost", "brute_force"]

_BRUTE_LIMIT = 10
_CHUNK = 65536


@dataclass(frozen=True)
class Assignment:
    """A matching of size min(n, m): (row, col) pairs sorted by row."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float


def _validate(costs) -> np.ndarray:
    c = np.ascontiguousarray(costs, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise ValueError(f"cost matrix must be 2-D and non-empty, got shape {c.shape}")
    if not np.isfinite(c).all():
        raise ValueError("cost matrix contains NaN or infinite entries")
    return c


def solve_min_cost(costs) -> Assignment:
    """Globally minimal matching of size min(n, m) over finite costs."""
    c = _validate(costs)
    n, m = c.shape
    if n <= m:
        col_of_row = hungarian(c)
        pairs = tuple((i, int(col_of_row[i])) for i in range(n))
    else:
        row_of_col = hungarian(np.ascontiguousarray(c.T))
        pairs = tuple(sorted((int(row_of_col[j]), j) for j in range(m)))
    total = float(sum(c[i, j] for i, j in pairs))
    return Assignment(pairs, total)


def brute_force(costs, limit: int = _BRUTE_LIMIT) -> Assignment:
    """Exhaustive minimum over all matchings; requires min(n, m) <= limit.

    Deterministic: among ties the lexicographically smallest column
    selection wins.  Enumeration is chunked so memory stays bounded.
    """
    c = _validate(costs)
    n, m = c.shape
    if min(n, m) > limit:
        raise ValueError(f"brute force limited to min(n, m) <= {limit}")
    transposed = n > m
    if transposed:
        c = np.ascontiguousarray(c.T)
        n, m = c.shape

    rows = np.arange(n)
    best_total = np.inf
    best_perm: tuple[int, ...] | None = None
    perm_iter = itertools.permutations(range(m), n)
    while True:
        chunk = list(itertools.islice(perm_iter, _CHUNK))
        if not chunk:
            break
        perms = np.array(chunk, dtype=np.int64)
        totals = c[rows, perms].sum(axis=1)
        k = int(np.argmin(totals))
        if totals[k] < best_total:
            best_total = float(totals[k])
            best_perm = chunk[k]
    assert best_perm is not None
    pairs = [(i, best_perm[i]) for i in range(n)]
    if transposed:
        pairs = sorted((j, i) for i, j in pairs)
    return Assignment(tuple(pairs), best_total)
