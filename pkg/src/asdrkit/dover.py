"""Rank-weighted, overlap-aware fusion of diarization hypotheses.

Two stages, following the DOVER family: greedy-incremental label mapping
onto a growing anchor label space (rank order, maximum-overlap matching
per hypothesis), then sweep-line voting that, per homogeneous region,
estimates the speaker count as the weighted mean of the hypotheses'
counts (half rounds up) and emits that many highest-scoring speakers.
Processing always runs in rank order, so fusion does not depend on the
order hypotheses are supplied in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._sweep import cover as _cover
from ._sweep import merge_intervals as _merge_intervals
from ._sweep import overlap_ticks as _overlap_ticks
from .assignment import solve_min_cost
from .timeline import Annotation, Segment, canonicalize

__all__ = ["RankedHypothesis", "rank_weights", "make_ranked", "map_labels", "fuse"]

_ROUND_EPS = 1e-9  # absorbs float noise just below an exact half


@dataclass(frozen=True)
class RankedHypothesis:
    annotation: Annotation
    rank: int
    weight: float

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not self.weight > 0:
            raise ValueError("weight must be positive")


def rank_weights(ranks: Sequence[int], exponent: float = 0.5) -> list[float]:
    """rank^(-exponent), normalised to sum 1; exponent 0 means uniform."""
    ranks = list(ranks)
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be >= 1")
    if len(set(ranks)) != len(ranks):
        raise ValueError("ranks must be unique")
    raw = [r ** -float(exponent) for r in ranks]
    total = sum(raw)
    return [w / total for w in raw]


def make_ranked(
    annotations: Sequence[Annotation],
    ranks: Sequence[int] | None = None,
    weights: Sequence[float] | None = None,
    exponent: float = 0.5,
) -> list[RankedHypothesis]:
    """Bundle annotations with ranks (default: input order) and weights
    (default: rank-based); explicit weights are normalised to sum 1."""
    if ranks is None:
        ranks = list(range(1, len(annotations) + 1))
    ranks = [int(r) for r in ranks]
    if len(ranks) != len(annotations):
        raise ValueError("need one rank per annotation")
    if weights is None:
        weights = rank_weights(ranks, exponent)
    else:
        if len(weights) != len(annotations):
            raise ValueError("need one weight per annotation")
        total = float(sum(weights))
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        weights = [float(w) / total for w in weights]
    return [
        RankedHypothesis(ann, rank, weight)
        for ann, rank, weight in zip(annotations, ranks, weights)
    ]


def _fresh_label(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def map_labels(hyps: Sequence[RankedHypothesis]) -> list[RankedHypothesis]:
    """Relabel hypotheses onto one shared label space.

    In rank order: the best hypothesis donates the anchor labels; each
    later hypothesis is matched speaker-to-anchor by maximum total overlap
    against the accumulated anchor timeline, and speakers with no overlap
    at all get fresh labels (which then join the anchor).  Each
    hypothesis's relabeling is a bijection.
    """
    if len(hyps) < 2:
        raise ValueError("label mapping needs at least two hypotheses")
    recs = {h.annotation.recording for h in hyps if h.annotation.segments}
    if len(recs) > 1:
        raise ValueError(f"recording mismatch: {', '.join(sorted(recs))}")
    if len({h.rank for h in hyps}) != len(hyps):
        raise ValueError("ranks must be unique")

    order = sorted(range(len(hyps)), key=lambda i: hyps[i].rank)
    anchor: dict[str, list[tuple[int, int]]] = {}
    relabeled: dict[int, Annotation] = {}

    for step, idx in enumerate(order):
        ann = hyps[idx].annotation
        ivs = ann.intervals_by_speaker()
        speakers = sorted(ivs)
        if step == 0:
            mapping = {spk: spk for spk in speakers}
        else:
            anchor_labels = sorted(anchor)
            mapping = {}
            if speakers and anchor_labels:
                overlap = np.zeros((len(speakers), len(anchor_labels)))
                for i, spk in enumerate(speakers):
                    for j, lab in enumerate(anchor_labels):
                        overlap[i, j] = _overlap_ticks(ivs[spk], anchor[lab])
                for i, j in solve_min_cost(-overlap).pairs:
                    if overlap[i, j] > 0:
                        mapping[speakers[i]] = anchor_labels[j]
            taken = set(anchor) | set(mapping.values())
            for spk in speakers:
                if spk not in mapping:
                    label = _fresh_label(spk, taken)
                    mapping[spk] = label
                    taken.add(label)
        for spk in speakers:
            label = mapping[spk]
            anchor[label] = _merge_intervals(anchor.get(label, []) + ivs[spk])
        relabeled[idx] = canonicalize(
            [
                Segment(s.recording, mapping[s.speaker], s.onset_ticks, s.duration_ticks)
                for s in ann.segments
            ],
            recording=ann.recording,
        )

    return [
        RankedHypothesis(relabeled[i], hyps[i].rank, hyps[i].weight)
        for i in range(len(hyps))
    ]


def fuse(hyps: Sequence[RankedHypothesis]) -> Annotation:
    """Fuse mapped hypotheses into one annotation by weighted voting."""
    if not hyps:
        raise ValueError("nothing to fuse")
    if len(hyps) == 1:
        return canonicalize(hyps[0].annotation.segments, hyps[0].annotation.recording)
    mapped = map_labels(hyps)
    recording = next(
        (h.annotation.recording for h in mapped if h.annotation.segments), ""
    )
    total_w = sum(h.weight for h in mapped)
    weights = [h.weight / total_w for h in mapped]

    coverage: list[dict[str, list[tuple[int, int]]]] = [
        h.annotation.intervals_by_speaker() for h in mapped
    ]
    edges: set[int] = set()
    for ivs in coverage:
        for spans in ivs.values():
            for on, off in spans:
                edges.add(on)
                edges.add(off)
    if not edges:
        return canonicalize([], recording=recording)

    points = np.array(sorted(edges), dtype=np.int64)
    n_iv = len(points) - 1
    labels = sorted({lab for ivs in coverage for lab in ivs})
    # per label: weighted vote mass per elementary interval
    score = {lab: np.zeros(n_iv) for lab in labels}
    count_mean = np.zeros(n_iv)
    for w, ivs in zip(weights, coverage):
        for lab, spans in ivs.items():
            cov = _cover(points, spans)
            score[lab] += w * cov
            count_mean += w * cov

    n_active = np.floor(count_mean + 0.5 + _ROUND_EPS).astype(np.int64)
    segments: list[Segment] = []
    for iv in np.flatnonzero(n_active > 0):
        ranked = sorted(
            (lab for lab in labels if score[lab][iv] > 0),
            key=lambda lab: (-score[lab][iv], lab),
        )
        for lab in ranked[: n_active[iv]]:
            segments.append(
                Segment(recording, lab, int(points[iv]), int(points[iv + 1] - points[iv]))
            )
    return canonicalize(segments, recording=recording)
