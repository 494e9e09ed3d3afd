"""Normalized-maximum-eigengap spectral clustering over embedding affinities.

The affinity sparsity (row-wise p-nearest-neighbour binarisation) is tuned
by minimising the ratio of the normalised neighbour count p/n to the
largest eigengap of the unnormalised graph Laplacian D - A; the speaker
count is read off the position of that eigengap.  Clustering then runs
k-means (k-means++ init, seeded, restart cap 100, relative inertia
tolerance 1e-6) on the rows of the k smallest-eigenvalue eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .formats import EmbeddingSet
from .rng import Xoshiro256StarStar
from .timeline import Annotation, Segment, canonicalize

__all__ = [
    "NmeResult",
    "cosine_affinity",
    "binarize_symmetrize",
    "nme_tune",
    "spectral_cluster",
    "nmesc_cluster",
    "labels_to_annotation",
]

_KMEANS_RESTARTS = 100
_KMEANS_TOL = 1e-6
_KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class NmeResult:
    """Outcome of the p sweep: chosen sparsity, speaker count, trace."""

    best_p: int
    est_speakers: int
    nme_values: tuple[tuple[int, float, float], ...]  # (p, eigengap, ratio)


def cosine_affinity(embeddings: EmbeddingSet) -> np.ndarray:
    """Pairwise cosine similarity with an exact unit diagonal."""
    if len(embeddings) < 1:
        raise ValueError("need at least one embedding")
    vectors = embeddings.vectors
    norms = np.linalg.norm(vectors, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        onset, offset = embeddings.windows[int(zero[0])]
        raise ValueError(
            f"zero-norm embedding in window ({onset / 10000}, {offset / 10000})"
        )
    unit = vectors / norms[:, None]
    a = unit @ unit.T
    a = (a + a.T) / 2.0
    np.clip(a, -1.0, 1.0, out=a)
    np.fill_diagonal(a, 1.0)
    return a


def binarize_symmetrize(affinity: np.ndarray, p: int) -> np.ndarray:
    """Keep each row's p largest off-diagonal entries as 1 (ties favour the
    lower column index), then average with the transpose: values {0, .5, 1}."""
    n = affinity.shape[0]
    if not 1 <= p < n:
        raise ValueError(f"p must satisfy 1 <= p < n, got p={p}, n={n}")
    scores = affinity.astype(np.float64, copy=True)
    np.fill_diagonal(scores, -np.inf)
    b = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        order = np.argsort(-scores[i], kind="stable")
        b[i, order[:p]] = 1.0
    return (b + b.T) / 2.0


def _laplacian_eigvals(binarized: np.ndarray) -> np.ndarray:
    lap = np.diag(binarized.sum(axis=1)) - binarized
    return np.linalg.eigvalsh(lap)


def nme_tune(
    affinity: np.ndarray,
    p_candidates: Iterable[int] | None = None,
    max_speakers: int = 4,
) -> NmeResult:
    """Sweep p, scoring each by (p/n) / largest-eigengap; smaller is better.

    The eigengap search runs over k in [1, max_speakers]; ties in the ratio
    go to the smaller p, ties in the eigengap to the smaller k.
    """
    n = affinity.shape[0]
    if max_speakers < 1:
        raise ValueError("max_speakers must be >= 1")
    if n < 2:
        raise ValueError("need at least two embeddings to tune")
    if p_candidates is None:
        p_candidates = range(1, min(n - 1, n // 2) + 1)
    candidates = sorted(set(int(p) for p in p_candidates))
    if not candidates or candidates[0] < 1 or candidates[-1] >= n:
        raise ValueError(f"p candidates must lie in [1, {n - 1}]")

    trace = []
    best_p = None
    best_ratio = np.inf
    best_k = 1
    for p in candidates:
        lam = _laplacian_eigvals(binarize_symmetrize(affinity, p))
        k_max = min(max_speakers, n - 1)
        gaps = lam[1 : k_max + 1] - lam[:k_max]
        k_at = int(np.argmax(gaps))  # first maximum: smaller k wins ties
        gap = float(gaps[k_at])
        ratio = (p / n) / gap if gap > 0 else np.inf
        trace.append((p, gap, ratio))
        if ratio < best_ratio:
            best_ratio = ratio
            best_p = p
            best_k = k_at + 1
    if best_p is None or not np.isfinite(best_ratio):
        raise ValueError("degenerate affinity: no positive eigengap at any p")
    return NmeResult(best_p, best_k, tuple(trace))


def _kmeans_pp_init(points: np.ndarray, k: int, rng: Xoshiro256StarStar) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.randrange(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            centers[c] = points[rng.randrange(n)]
            continue
        target = rng.uniform() * total
        idx = int(np.searchsorted(np.cumsum(d2), target, side="right"))
        idx = min(idx, n - 1)
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _kmeans_once(points: np.ndarray, k: int, rng: Xoshiro256StarStar):
    n = points.shape[0]
    centers = _kmeans_pp_init(points, k, rng)
    labels = np.zeros(n, dtype=np.int64)
    inertia = np.inf
    for _ in range(_KMEANS_MAX_ITER):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(dists, axis=1)
        row_d2 = dists[np.arange(n), labels]
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                # revive an empty cluster with the worst-fitting point
                far = int(np.argmax(row_d2))
                centers[c] = points[far]
                labels[far] = c
                row_d2[far] = 0.0
        new_inertia = float(((points - centers[labels]) ** 2).sum())
        if np.isfinite(inertia) and inertia - new_inertia <= _KMEANS_TOL * max(
            inertia, 1e-300
        ):
            inertia = new_inertia
            break
        inertia = new_inertia
    return labels, inertia


def spectral_cluster(affinity: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Cluster the rows of the k bottom eigenvectors of L = D - A.

    Labels are renumbered by first occurrence, so identical inputs give
    identical outputs for a fixed seed.
    """
    n = affinity.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    lap = np.diag(affinity.sum(axis=1)) - affinity
    _, vecs = np.linalg.eigh(lap)
    points = np.ascontiguousarray(vecs[:, :k])

    rng = Xoshiro256StarStar(seed)
    best_labels = None
    best_inertia = np.inf
    for _ in range(_KMEANS_RESTARTS):
        labels, inertia = _kmeans_once(points, k, rng)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
        if best_inertia == 0.0:
            break
    assert best_labels is not None
    return _renumber(best_labels)


def _renumber(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        out[i] = mapping.setdefault(int(lab), len(mapping))
    return out


def nmesc_cluster(
    embeddings: EmbeddingSet,
    max_speakers: int = 4,
    p_candidates: Iterable[int] | None = None,
    seed: int = 0,
) -> tuple[np.ndarray, NmeResult]:
    """Full chain: cosine affinity, p sweep, binarise at best p, cluster."""
    affinity = cosine_affinity(embeddings)
    result = nme_tune(affinity, p_candidates, max_speakers)
    binarized = binarize_symmetrize(affinity, result.best_p)
    labels = spectral_cluster(binarized, result.est_speakers, seed)
    return labels, result


def labels_to_annotation(
    embeddings: EmbeddingSet, labels: Sequence[int], recording: str | None = None
) -> Annotation:
    """Window times become segments named spk<label>."""
    rec = recording if recording is not None else embeddings.recording
    segments = [
        Segment(rec, f"spk{int(lab)}", onset, offset - onset)
        for (onset, offset), lab in zip(embeddings.windows, labels)
    ]
    return canonicalize(segments, recording=rec)
