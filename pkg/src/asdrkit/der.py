"""Diarization error rate via sweep-line interval decomposition.

The scored timeline is cut at every segment boundary, collar edge and
region edge; each homogeneous piece contributes misses, false alarms and
speaker confusion according to how many reference/hypothesis speakers are
active and how many are correctly matched under the optimal speaker
mapping.  All interval arithmetic happens on the integer tick grid, with
collar halves on a doubled grid so an odd collar stays exact.

Conventions (both CLI-exposed): collar excludes +/- collar/2 around every
reference boundary (md-eval style); overlap regions are scored unless
``score_overlap=False``, which drops intervals with more than one
reference speaker entirely.  The speaker mapping maximises overlap on the
region-clipped annotations, computed once per recording; corpus-level DER
sums numerators and denominators over recordings before dividing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from typing import Mapping

import numpy as np

from ._sweep import cover as _cover
from ._sweep import merge_intervals as _merge_intervals
from ._sweep import overlap_ticks as _overlap_ticks
from .assignment import solve_min_cost
from .timeline import Annotation, ScoringRegionSet, canonicalize, crop, seconds_to_ticks

__all__ = [
    "DerReport",
    "optimal_speaker_mapping",
    "compute_der",
    "compute_der_corpus",
    "combine_reports",
    "absolute_reduction",
]

_HALF_TICKS_PER_SECOND = 20_000  # doubled grid so collar/2 stays integral


@dataclass(frozen=True)
class DerReport:
    """Additive DER decomposition in seconds plus the speaker mapping used."""

    scored_speech: float
    missed: float
    false_alarm: float
    confusion: float
    speaker_map: dict[str, str] = field(default_factory=dict)

    @property
    def der(self) -> float | None:
        """Error ratio, or None when no reference speech was scored."""
        if self.scored_speech == 0:
            return None
        return (self.missed + self.false_alarm + self.confusion) / self.scored_speech


def combine_reports(reports) -> DerReport:
    """Corpus-level aggregate: sum components, then one division."""
    scored = missed = fa = conf = 0.0
    for r in reports:
        scored += r.scored_speech
        missed += r.missed
        fa += r.false_alarm
        conf += r.confusion
    return DerReport(scored, missed, fa, conf, {})


def optimal_speaker_mapping(ref: Annotation, hyp: Annotation) -> dict[str, str]:
    """Injective ref->hyp speaker map maximising total overlap duration.

    Speakers whose best match shares no speech stay unmapped.
    """
    if ref.segments and hyp.segments and ref.recording != hyp.recording:
        raise ValueError(
            f"recording mismatch: {ref.recording!r} vs {hyp.recording!r}"
        )
    ref_ivs = ref.intervals_by_speaker()
    hyp_ivs = hyp.intervals_by_speaker()
    ref_spk = sorted(ref_ivs)
    hyp_spk = sorted(hyp_ivs)
    if not ref_spk or not hyp_spk:
        return {}
    overlap = np.zeros((len(ref_spk), len(hyp_spk)), dtype=np.float64)
    for i, r in enumerate(ref_spk):
        for j, h in enumerate(hyp_spk):
            overlap[i, j] = _overlap_ticks(ref_ivs[r], hyp_ivs[h])
    result = solve_min_cost(-overlap)
    return {
        ref_spk[i]: hyp_spk[j] for i, j in result.pairs if overlap[i, j] > 0
    }


def compute_der(
    ref: Annotation,
    hyp: Annotation,
    collar: float = 0.25,
    regions: ScoringRegionSet | None = None,
    score_overlap: bool = True,
) -> DerReport:
    """Score one recording; see the module docstring for the conventions."""
    if collar < 0:
        raise ValueError("collar must be non-negative")
    if ref.segments and hyp.segments and ref.recording != hyp.recording:
        raise ValueError(
            f"recording mismatch: {ref.recording!r} vs {hyp.recording!r}"
        )

    ref_c = crop(ref, regions)
    hyp_c = crop(hyp, regions)
    mapping = optimal_speaker_mapping(ref_c, hyp_c)

    collar_ticks = seconds_to_ticks(collar)  # == collar/2 on the doubled grid

    # everything below runs on doubled ticks
    ref_ivs = {
        spk: [(2 * on, 2 * off) for on, off in ivs]
        for spk, ivs in ref_c.intervals_by_speaker().items()
    }
    hyp_ivs = {
        spk: [(2 * on, 2 * off) for on, off in ivs]
        for spk, ivs in hyp_c.intervals_by_speaker().items()
    }
    zones: list[tuple[int, int]] = []
    if collar_ticks > 0:
        for seg in ref_c.segments:
            for b in (2 * seg.onset_ticks, 2 * seg.offset_ticks):
                zones.append((max(0, b - collar_ticks), b + collar_ticks))
        zones = _merge_intervals(zones)

    edges: set[int] = set()
    for ivs in ref_ivs.values():
        for on, off in ivs:
            edges.add(on)
            edges.add(off)
    for ivs in hyp_ivs.values():
        for on, off in ivs:
            edges.add(on)
            edges.add(off)
    for on, off in zones:
        edges.add(on)
        edges.add(off)
    if not edges:
        return DerReport(0.0, 0.0, 0.0, 0.0, mapping)

    points = np.array(sorted(edges), dtype=np.int64)
    widths = np.diff(points)
    n_iv = len(widths)

    nr = np.zeros(n_iv, dtype=np.int64)
    for ivs in ref_ivs.values():
        nr += _cover(points, ivs)
    nh = np.zeros(n_iv, dtype=np.int64)
    for ivs in hyp_ivs.values():
        nh += _cover(points, ivs)
    nc = np.zeros(n_iv, dtype=np.int64)
    for r_spk, h_spk in mapping.items():
        nc += _cover(points, ref_ivs[r_spk]) & _cover(points, hyp_ivs[h_spk])

    scored = np.ones(n_iv, dtype=bool)
    if zones:
        scored &= ~_cover(points, zones)
    if not score_overlap:
        scored &= nr <= 1

    w = widths * scored
    missed_t = int((w * np.maximum(nr - nh, 0)).sum())
    fa_t = int((w * np.maximum(nh - nr, 0)).sum())
    conf_t = int((w * (np.minimum(nr, nh) - nc)).sum())
    speech_t = int((w * nr).sum())

    return DerReport(
        speech_t / _HALF_TICKS_PER_SECOND,
        missed_t / _HALF_TICKS_PER_SECOND,
        fa_t / _HALF_TICKS_PER_SECOND,
        conf_t / _HALF_TICKS_PER_SECOND,
        mapping,
    )


def compute_der_corpus(
    refs: Mapping[str, Annotation],
    hyps: Mapping[str, Annotation],
    collar: float = 0.25,
    regions: Mapping[str, ScoringRegionSet] | None = None,
    score_overlap: bool = True,
    max_workers: int | None = None,
) -> tuple[dict[str, DerReport], DerReport]:
    """Score every recording appearing on either side; return per-recording
    reports plus the time-weighted corpus aggregate."""
    recordings = sorted(set(refs) | set(hyps))

    def score(rec: str) -> DerReport:
        ref = refs.get(rec) or canonicalize([], recording=rec)
        hyp = hyps.get(rec) or canonicalize([], recording=rec)
        reg = regions.get(rec) if regions else None
        return compute_der(ref, hyp, collar=collar, regions=reg, score_overlap=score_overlap)

    if max_workers is not None and max_workers > 1 and len(recordings) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(score, recordings))
        per_rec = dict(zip(recordings, reports))
    else:
        per_rec = {rec: score(rec) for rec in recordings}
    return per_rec, combine_reports(per_rec.values())


def absolute_reduction(baseline: float, system: float) -> float:
    """baseline - system, at 2 decimals (how the headline gains are quoted)."""
    delta = Decimal(str(baseline)) - Decimal(str(system))
    return float(delta.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
