"""Shared fixtures; warms the JIT kernels so timed tests measure work."""

from __future__ import annotations

import numpy as np
import pytest

from asdrkit import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    ref = np.array([1, 2, 3], dtype=np.int64)
    hyp = np.array([1, 3], dtype=np.int64)
    _kernels.edit_counts(ref, hyp)
    _kernels.align_path(np.zeros((2, 2), dtype=np.uint8))
    _kernels.hungarian(np.zeros((2, 3), dtype=np.float64))
    _kernels.median_filter_1d(np.zeros(5, dtype=np.float64), 3)
    _kernels.hysteresis(np.zeros(5, dtype=np.float64), 0.5, 0.5)
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    _kernels.xoshiro_fill(state, np.empty(8, dtype=np.uint64))
