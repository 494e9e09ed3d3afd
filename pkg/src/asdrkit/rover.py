"""Recognizer-output voting over a word transition network.

Hypotheses are aligned one after another into a slot lattice: a token
matches a slot at zero cost when it equals any token already in the slot,
otherwise alignment pays unit substitution/deletion/insertion costs with
ties preferring match/substitute, then deletion, then insertion.  Voting
scores each slot candidate w (NULL included) as

    alpha * N(w)/Ns + (1 - alpha) * meanconf(w)

where tokens without confidences count as confidence 1 and NULL carries
the configured ``null_conf``.  Alignment order matters (classic ROVER
behaviour), so callers should pass the best system first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernels import align_path
from .formats import TranscriptSet
from .cer import _scoring_tokens

__all__ = ["WtnSlot", "WordTransitionNetwork", "build_wtn", "vote", "fuse_transcripts"]


@dataclass
class WtnSlot:
    """One lattice slot: per-system token (None = NULL) and confidence."""

    tokens: list[str | None]
    confidences: list[float | None]

    def non_null(self) -> set[str]:
        return {t for t in self.tokens if t is not None}


@dataclass
class WordTransitionNetwork:
    n_systems: int = 0
    slots: list[WtnSlot] = field(default_factory=list)


def build_wtn(
    hypotheses: Sequence[Sequence[str]],
    confidences: Sequence[Sequence[float]] | None = None,
) -> WordTransitionNetwork:
    """Initialise from the first hypothesis, then align each next one in."""
    if not hypotheses:
        raise ValueError("need at least one hypothesis")
    if confidences is not None:
        if len(confidences) != len(hypotheses):
            raise ValueError("need one confidence sequence per hypothesis")
        for hyp, conf in zip(hypotheses, confidences):
            if len(hyp) != len(conf):
                raise ValueError("confidence sequence length mismatch")

    wtn = WordTransitionNetwork()
    for sys_idx, hyp in enumerate(hypotheses):
        conf = confidences[sys_idx] if confidences is not None else None
        _add_hypothesis(wtn, [str(t) for t in hyp], conf)
    return wtn


def _add_hypothesis(wtn, tokens: list[str], conf) -> None:
    n_prev = wtn.n_systems
    if n_prev == 0:
        for j, token in enumerate(tokens):
            wtn.slots.append(
                WtnSlot([token], [float(conf[j]) if conf is not None else None])
            )
        wtn.n_systems = 1
        return

    n_slots = len(wtn.slots)
    match = np.zeros((n_slots, len(tokens)), dtype=np.uint8)
    slot_sets = [slot.non_null() for slot in wtn.slots]
    for j, token in enumerate(tokens):
        for i in range(n_slots):
            if token in slot_sets[i]:
                match[i, j] = 1
    ops = align_path(match)

    new_slots: list[WtnSlot] = []
    i = j = 0
    for op in ops:
        if op == 0:  # token joins slot i
            slot = wtn.slots[i]
            slot.tokens.append(tokens[j])
            slot.confidences.append(float(conf[j]) if conf is not None else None)
            new_slots.append(slot)
            i += 1
            j += 1
        elif op == 1:  # slot unpaired: this system contributes NULL
            slot = wtn.slots[i]
            slot.tokens.append(None)
            slot.confidences.append(None)
            new_slots.append(slot)
            i += 1
        else:  # new slot: all previous systems get NULL
            slot = WtnSlot([None] * n_prev, [None] * n_prev)
            slot.tokens.append(tokens[j])
            slot.confidences.append(float(conf[j]) if conf is not None else None)
            new_slots.append(slot)
            j += 1
    wtn.slots = new_slots
    wtn.n_systems = n_prev + 1


def vote(
    wtn: WordTransitionNetwork, alpha: float = 1.0, null_conf: float = 0.7
) -> tuple[str, ...]:
    """Per-slot argmax of the combined frequency/confidence score.

    Ties prefer a real token over NULL, then the token contributed by the
    lowest-index system.  A NULL winner emits nothing.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not 0.0 <= null_conf <= 1.0:
        raise ValueError("null_conf must lie in [0, 1]")
    ns = wtn.n_systems
    out: list[str] = []
    for slot in wtn.slots:
        tally: dict[str | None, list] = {}
        for sys_idx, (token, conf) in enumerate(zip(slot.tokens, slot.confidences)):
            entry = tally.setdefault(token, [0, 0.0, sys_idx])
            entry[0] += 1
            entry[1] += null_conf if token is None else (1.0 if conf is None else conf)
        best_token = None
        best_key = None
        for token, (count, conf_sum, first_sys) in tally.items():
            score = alpha * (count / ns) + (1.0 - alpha) * (conf_sum / count)
            key = (score, token is not None, -first_sys)
            if best_key is None or key > best_key:
                best_key = key
                best_token = token
        if best_token is not None:
            out.append(best_token)
    return tuple(out)


def fuse_transcripts(
    sets: Sequence[TranscriptSet],
    alpha: float = 1.0,
    null_conf: float = 0.7,
    unit: str = "char",
) -> TranscriptSet:
    """Fuse per-utterance across systems; all sets must share identical keys.

    Systems should be passed best first: the first one anchors the lattice.
    """
    if not sets:
        raise ValueError("need at least one transcript set")
    keys = set(sets[0].entries)
    for k, ts in enumerate(sets[1:], start=2):
        if set(ts.entries) != keys:
            diff = set(ts.entries) ^ keys
            listed = ", ".join("_".join(map(str, d)) for d in sorted(diff)[:5])
            raise ValueError(f"system {k} has mismatched utterance keys: {listed}")
    fused = {}
    for key in sorted(keys):
        hyps = [_scoring_tokens(ts.entries[key], unit) for ts in sets]
        fused[key] = vote(build_wtn(hyps), alpha=alpha, null_conf=null_conf)
    return TranscriptSet(fused)
