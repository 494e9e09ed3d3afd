"""Token-level edit-distance scoring: CER and concatenated
minimum-permutation CER.

"Character" scoring operates on Unicode grapheme clusters of the
concatenated tokens (whitespace separates tokens during parsing and is
never itself scored); ``unit="token"`` scores whitespace tokens as given.
Rates pool error counts over the whole corpus before dividing, they are
never averages of per-utterance rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import regex

from ._kernels import edit_counts
from .assignment import solve_min_cost
from .formats import TranscriptSet

__all__ = [
    "EditCounts",
    "CerReport",
    "CpcerReport",
    "graphemes",
    "edit_distance",
    "cer",
    "cpcer",
]

_GRAPHEME = regex.compile(r"\X")


def graphemes(text: str) -> tuple[str, ...]:
    """Split text into extended grapheme clusters."""
    return tuple(_GRAPHEME.findall(text))


def _scoring_tokens(tokens, unit: str) -> tuple[str, ...]:
    if unit == "token":
        return tuple(tokens)
    if unit == "char":
        return graphemes("".join(tokens))
    raise ValueError(f"unit must be 'char' or 'token', got {unit!r}")


@dataclass(frozen=True)
class EditCounts:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float | None:
        """Error ratio, or None when there is no reference mass."""
        if self.ref_len == 0:
            return None
        return self.distance / self.ref_len

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_len + other.ref_len,
        )


_ZERO = EditCounts(0, 0, 0, 0)


def edit_distance(ref, hyp) -> EditCounts:
    """Minimal unit-cost S+D+I; ties prefer substitution, then deletion."""
    ref = tuple(ref)
    hyp = tuple(hyp)
    vocab: dict[str, int] = {}
    for token in ref:
        vocab.setdefault(token, len(vocab))
    for token in hyp:
        vocab.setdefault(token, len(vocab))
    ref_ids = np.fromiter((vocab[t] for t in ref), dtype=np.int64, count=len(ref))
    hyp_ids = np.fromiter((vocab[t] for t in hyp), dtype=np.int64, count=len(hyp))
    s, d, i = edit_counts(ref_ids, hyp_ids)
    return EditCounts(int(s), int(d), int(i), len(ref))


@dataclass(frozen=True)
class CerReport:
    counts: EditCounts
    per_utterance: dict[tuple, EditCounts]

    @property
    def rate(self) -> float | None:
        return self.counts.rate


def cer(ref: TranscriptSet, hyp: TranscriptSet, unit: str = "char") -> CerReport:
    """Utterance-keyed CER: hypothesis keys must be a subset of reference
    keys; reference utterances without a hypothesis score as deletions."""
    extra = set(hyp.entries) - set(ref.entries)
    if extra:
        listed = ", ".join("_".join(map(str, k)) for k in sorted(extra)[:5])
        raise ValueError(f"hypothesis utterances missing from reference: {listed}")
    per_utt: dict[tuple, EditCounts] = {}
    total = _ZERO
    for key in sorted(ref.entries):
        ref_tokens = _scoring_tokens(ref.entries[key], unit)
        hyp_entry = hyp.entries.get(key)
        if hyp_entry is None:
            counts = EditCounts(0, len(ref_tokens), 0, len(ref_tokens))
        else:
            counts = edit_distance(ref_tokens, _scoring_tokens(hyp_entry, unit))
        per_utt[key] = counts
        total = total + counts
    return CerReport(total, per_utt)


@dataclass(frozen=True)
class RecordingCpcer:
    assignment: tuple[tuple[str, str], ...]  # (ref_speaker, hyp_speaker)
    counts: EditCounts


@dataclass(frozen=True)
class CpcerReport:
    per_recording: dict[str, RecordingCpcer]
    counts: EditCounts

    @property
    def rate(self) -> float | None:
        return self.counts.rate


def _concatenations(ts: TranscriptSet, rec: str, unit: str) -> dict[str, tuple[str, ...]]:
    speakers = ts.by_recording_speaker().get(rec, {})
    return {
        spk: _scoring_tokens(
            [t for _, _, tokens in utts for t in tokens], unit
        )
        for spk, utts in speakers.items()
    }


def cpcer(ref: TranscriptSet, hyp: TranscriptSet, unit: str = "char") -> CpcerReport:
    """Concatenated minimum-permutation CER, pooled over recordings.

    Per recording, each speaker's utterances are concatenated in time
    order; the ref->hyp speaker assignment minimising the total edit
    distance is found by padding the short side with empty sequences,
    so surplus speakers contribute pure deletion/insertion mass.
    """
    per_recording: dict[str, RecordingCpcer] = {}
    total = _ZERO
    for rec in sorted(set(ref.recordings()) | set(hyp.recordings())):
        ref_cat = _concatenations(ref, rec, unit)
        hyp_cat = _concatenations(hyp, rec, unit)
        result = _cpcer_recording(ref_cat, hyp_cat)
        per_recording[rec] = result
        total = total + result.counts
    return CpcerReport(per_recording, total)


def _cpcer_recording(
    ref_cat: dict[str, tuple[str, ...]], hyp_cat: dict[str, tuple[str, ...]]
) -> RecordingCpcer:
    ref_spk = sorted(ref_cat)
    hyp_spk = sorted(hyp_cat)
    counts = _ZERO
    if not ref_spk or not hyp_spk:
        for spk in ref_spk:
            n = len(ref_cat[spk])
            counts = counts + EditCounts(0, n, 0, n)
        for spk in hyp_spk:
            counts = counts + EditCounts(0, 0, len(hyp_cat[spk]), 0)
        return RecordingCpcer((), counts)

    dist = {}
    cost = np.zeros((len(ref_spk), len(hyp_spk)), dtype=np.float64)
    for i, r in enumerate(ref_spk):
        for j, h in enumerate(hyp_spk):
            ec = edit_distance(ref_cat[r], hyp_cat[h])
            dist[i, j] = ec
            cost[i, j] = ec.distance
    # Padding the short side with empty sequences is equivalent to full
    # matching of the short side on a cost matrix with the long side's
    # unmatched mass (its full length) subtracted out: the constant sum of
    # long-side lengths is added back below.
    if len(ref_spk) <= len(hyp_spk):
        adj = cost - np.array([len(hyp_cat[h]) for h in hyp_spk], dtype=np.float64)
    else:
        adj = cost - np.array(
            [[len(ref_cat[r])] for r in ref_spk], dtype=np.float64
        )
    matching = solve_min_cost(adj)
    matched_ref = set()
    matched_hyp = set()
    pairs = []
    for i, j in matching.pairs:
        matched_ref.add(i)
        matched_hyp.add(j)
        pairs.append((ref_spk[i], hyp_spk[j]))
        counts = counts + dist[i, j]
    for i, r in enumerate(ref_spk):
        if i not in matched_ref:
            n = len(ref_cat[r])
            counts = counts + EditCounts(0, n, 0, n)
    for j, h in enumerate(hyp_spk):
        if j not in matched_hyp:
            counts = counts + EditCounts(0, 0, len(hyp_cat[h]), 0)
    return RecordingCpcer(tuple(sorted(pairs)), counts)
