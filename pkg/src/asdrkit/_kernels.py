"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The dispatched names at the bottom of this module (``edit_counts``,
``align_path``, ``hungarian``, ``median_filter_1d``, ``hysteresis``,
``xoshiro_fill``) point at whichever implementation the active backend
selected (see ``_backend``).  The two implementations of every kernel
return identical values; tests assert this and
``benchmarks/bench_kernels.py`` times both.
"""

from __future__ import annotations

import numpy as np

from ._backend import USE_NUMBA, jit

__all__ = [
    "edit_counts",
    "align_path",
    "hungarian",
    "median_filter_1d",
    "hysteresis",
    "xoshiro_fill",
]


# ---------------------------------------------------------------------------
# Levenshtein counts
#
# Unit-cost edit distance with a pinned tie rule: where several moves reach
# the minimum, substitution beats deletion beats insertion.  The loop version
# carries (sub, del, ins) triples forward through the same predecessor choice
# a backtrace would make, so only two rows are kept.  The numpy version
# builds the full distance matrix with vectorised row updates and then
# backtracks; both yield the same triple.
# ---------------------------------------------------------------------------


def _edit_counts_loop(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    prev_d = np.empty(m + 1, np.int64)
    prev_s = np.zeros(m + 1, np.int64)
    prev_dl = np.zeros(m + 1, np.int64)
    prev_in = np.empty(m + 1, np.int64)
    for j in range(m + 1):
        prev_d[j] = j
        prev_in[j] = j
    cur_d = np.empty(m + 1, np.int64)
    cur_s = np.empty(m + 1, np.int64)
    cur_dl = np.empty(m + 1, np.int64)
    cur_in = np.empty(m + 1, np.int64)
    for i in range(1, n + 1):
        cur_d[0] = i
        cur_s[0] = 0
        cur_dl[0] = i
        cur_in[0] = 0
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub_cost = 0 if ri == hyp[j - 1] else 1
            diag = prev_d[j - 1] + sub_cost
            up = prev_d[j] + 1
            left = cur_d[j - 1] + 1
            best = diag
            if up < best:
                best = up
            if left < best:
                best = left
            cur_d[j] = best
            if diag == best:
                cur_s[j] = prev_s[j - 1] + sub_cost
                cur_dl[j] = prev_dl[j - 1]
                cur_in[j] = prev_in[j - 1]
            elif up == best:
                cur_s[j] = prev_s[j]
                cur_dl[j] = prev_dl[j] + 1
                cur_in[j] = prev_in[j]
            else:
                cur_s[j] = cur_s[j - 1]
                cur_dl[j] = cur_dl[j - 1]
                cur_in[j] = cur_in[j - 1] + 1
        prev_d, cur_d = cur_d, prev_d
        prev_s, cur_s = cur_s, prev_s
        prev_dl, cur_dl = cur_dl, prev_dl
        prev_in, cur_in = cur_in, prev_in
    return prev_s[m], prev_dl[m], prev_in[m]


def _distance_matrix_numpy(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    d[0] = np.arange(m + 1)
    ar = np.arange(m + 1)
    for i in range(1, n + 1):
        vals = np.empty(m + 1, dtype=np.int64)
        vals[0] = i
        if m:
            sub = (ref[i - 1] != hyp).astype(np.int64)
            # candidates reaching cell j without an insertion as last move
            vals[1:] = np.minimum(d[i - 1, :-1] + sub, d[i - 1, 1:] + 1)
        # fold insertions in with a min-plus prefix scan
        d[i] = np.minimum.accumulate(vals - ar) + ar
    return d


def _edit_counts_numpy(ref, hyp):
    n = ref.shape[0]
    m = hyp.shape[0]
    d = _distance_matrix_numpy(ref, hyp)
    s = dl = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            sub_cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            if d[i, j] == d[i - 1, j - 1] + sub_cost:
                s += sub_cost
                i -= 1
                j -= 1
                continue
        if i > 0 and d[i, j] == d[i - 1, j] + 1:
            dl += 1
            i -= 1
            continue
        ins += 1
        j -= 1
    return s, dl, ins


# ---------------------------------------------------------------------------
# Alignment path over a boolean match matrix
#
# Generic DP used by the transcript-fusion network: ``match[i, j]`` says
# whether row item i pairs with column item j at zero cost (else cost 1);
# unpaired rows and columns cost 1 each.  Returned op codes, in forward
# order: 0 = pair (advance both), 1 = row only, 2 = column only.  Tie rule
# matches edit_counts: pair/substitute over row-skip over column-skip.
# ---------------------------------------------------------------------------


def _align_path_loop(match):
    n = match.shape[0]
    m = match.shape[1]
    d = np.empty((n + 1, m + 1), np.int64)
    for j in range(m + 1):
        d[0, j] = j
    for i in range(1, n + 1):
        d[i, 0] = i
        for j in range(1, m + 1):
            diag = d[i - 1, j - 1] + (0 if match[i - 1, j - 1] else 1)
            up = d[i - 1, j] + 1
            left = d[i, j - 1] + 1
            best = diag
            if up < best:
                best = up
            if left < best:
                best = left
            d[i, j] = best
    ops = np.empty(n + m, np.int8)
    k = n + m
    i = n
    j = m
    while i > 0 or j > 0:
        k -= 1
        if (
            i > 0
            and j > 0
            and d[i, j] == d[i - 1, j - 1] + (0 if match[i - 1, j - 1] else 1)
        ):
            ops[k] = 0
            i -= 1
            j -= 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            ops[k] = 1
            i -= 1
        else:
            ops[k] = 2
            j -= 1
    return ops[k:].copy()


def _align_path_numpy(match):
    n, m = match.shape
    d = np.empty((n + 1, m + 1), dtype=np.int64)
    d[0] = np.arange(m + 1)
    ar = np.arange(m + 1)
    for i in range(1, n + 1):
        vals = np.empty(m + 1, dtype=np.int64)
        vals[0] = i
        if m:
            sub = 1 - match[i - 1].astype(np.int64)
            vals[1:] = np.minimum(d[i - 1, :-1] + sub, d[i - 1, 1:] + 1)
        d[i] = np.minimum.accumulate(vals - ar) + ar
    ops: list[int] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + (0 if match[i - 1, j - 1] else 1):
            ops.append(0)
            i -= 1
            j -= 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            ops.append(1)
            i -= 1
        else:
            ops.append(2)
            j -= 1
    return np.array(ops[::-1], dtype=np.int8)


# ---------------------------------------------------------------------------
# Minimum-cost assignment (shortest augmenting path / Kuhn-Munkres)
#
# Requires n <= m and finite costs; returns col_of_row.  Every row is
# matched, which equals the pad-with-zero-cost-dummies convention for
# rectangular inputs.  Both implementations perform the identical sequence
# of float operations, so they agree bitwise.
# ---------------------------------------------------------------------------


def _hungarian_loop(cost):
    n = cost.shape[0]
    m = cost.shape[1]
    u = np.zeros(n + 1, np.float64)
    v = np.zeros(m + 1, np.float64)
    p = np.zeros(m + 1, np.int64)
    way = np.zeros(m + 1, np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = -1
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, np.int64)
    for j in range(1, m + 1):
        if p[j] > 0:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def _hungarian_numpy(cost):
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, np.int64)
    way = np.zeros(m + 1, np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1, :] - u[i0] - v[1:]
            upd = free & (cur < minv[1:])
            minv1 = minv[1:]
            minv1[upd] = cur[upd]
            way1 = way[1:]
            way1[upd] = j0
            masked = np.where(free, minv1, np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            rows = p[used]
            u[rows] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, np.int64)
    for j in range(1, m + 1):
        if p[j] > 0:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


# ---------------------------------------------------------------------------
# Sliding median with edge replication (window must be odd)
# ---------------------------------------------------------------------------


def _median_filter_loop(col, window):
    t = col.shape[0]
    half = window // 2
    out = np.empty(t, np.float64)
    buf = np.empty(window, np.float64)
    for i in range(t):
        for k in range(window):
            idx = i + k - half
            if idx < 0:
                idx = 0
            elif idx >= t:
                idx = t - 1
            buf[k] = col[idx]
        out[i] = np.sort(buf)[half]
    return out


def _median_filter_numpy(col, window):
    t = col.shape[0]
    if t == 0:
        return np.empty(0, np.float64)
    half = window // 2
    padded = np.pad(col, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, window)
    return np.median(windows, axis=-1)


# ---------------------------------------------------------------------------
# Hysteresis thresholding: enter at value >= onset, leave at value < offset
# ---------------------------------------------------------------------------


def _hysteresis_loop(col, onset, offset):
    t = col.shape[0]
    out = np.zeros(t, np.uint8)
    active = False
    for i in range(t):
        x = col[i]
        if active:
            if x < offset:
                active = False
        elif x >= onset:
            active = True
        if active:
            out[i] = 1
    return out


def _hysteresis_numpy(col, onset, offset):
    t = col.shape[0]
    if t == 0:
        return np.zeros(0, np.uint8)
    idx = np.arange(t)
    # offset <= onset, so the on and off event sets are disjoint; the state
    # at t is "on" exactly when the latest event at or before t is an onset
    last_on = np.maximum.accumulate(np.where(col >= onset, idx, -1))
    last_off = np.maximum.accumulate(np.where(col < offset, idx, -1))
    return (last_on > last_off).astype(np.uint8)


# ---------------------------------------------------------------------------
# xoshiro256** bulk generation; `state` is a 4-word uint64 array, mutated
# ---------------------------------------------------------------------------


def _xoshiro_fill_loop(state, out):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    five = np.uint64(5)
    nine = np.uint64(9)
    k7 = np.uint64(7)
    k57 = np.uint64(57)
    k17 = np.uint64(17)
    k45 = np.uint64(45)
    k19 = np.uint64(19)
    for i in range(out.shape[0]):
        x = s1 * five
        out[i] = ((x << k7) | (x >> k57)) * nine
        t = s1 << k17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << k45) | (s3 >> k19)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3


_MASK64 = (1 << 64) - 1


def _xoshiro_fill_py(state, out):
    s0 = int(state[0])
    s1 = int(state[1])
    s2 = int(state[2])
    s3 = int(state[3])
    for i in range(out.shape[0]):
        x = (s1 * 5) & _MASK64
        out[i] = ((((x << 7) & _MASK64) | (x >> 57)) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) & _MASK64) | (s3 >> 19)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3


if USE_NUMBA:
    edit_counts = jit(_edit_counts_loop)
    align_path = jit(_align_path_loop)
    hungarian = jit(_hungarian_loop)
    median_filter_1d = jit(_median_filter_loop)
    hysteresis = jit(_hysteresis_loop)
    xoshiro_fill = jit(_xoshiro_fill_loop)
else:
    edit_counts = _edit_counts_numpy
    align_path = _align_path_numpy
    hungarian = _hungarian_numpy
    median_filter_1d = _median_filter_numpy
    hysteresis = _hysteresis_numpy
    xoshiro_fill = _xoshiro_fill_py
