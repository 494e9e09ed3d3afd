"""Deterministic synthetic conversations, corruptions and embeddings.

These generators stand in for a real corpus: they provide exact ground
truth for the oracle suites and the Monte-Carlo fusion-gain checks.
Everything is a pure function of its spec; randomness comes only from the
pinned xoshiro256** stream (see ``rng``), so a seed reproduces fixtures
bit-for-bit.

The turn model alternates speakers with exponential turn lengths; overlap
is created by advancing the next turn's onset into the current one by
``mean_turn * ln(1 + overlap_ratio)``, which hits the requested overlap
fraction in expectation once clipping against short turns is accounted
for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .formats import EmbeddingSet, PosteriorMatrix, TranscriptSet
from .rng import Xoshiro256StarStar
from .timeline import Annotation, Segment, canonicalize, seconds_to_ticks

__all__ = [
    "ConversationSpec",
    "CorruptionSpec",
    "gen_conversation",
    "indicator_posteriors",
    "corrupt_annotation",
    "corrupt_transcript",
    "gen_embeddings",
    "gen_transcript_corpus",
]


@dataclass(frozen=True)
class ConversationSpec:
    seed: int
    n_speakers: int
    duration: float
    mean_turn: float = 2.0
    overlap_ratio: float = 0.0

    def __post_init__(self):
        if self.n_speakers < 1:
            raise ValueError("n_speakers must be >= 1")
        if self.duration <= 0 or self.mean_turn <= 0:
            raise ValueError("duration and mean_turn must be positive")
        if not 0.0 <= self.overlap_ratio <= 0.5:
            raise ValueError("overlap_ratio must lie in [0, 0.5]")


@dataclass(frozen=True)
class CorruptionSpec:
    seed: int
    boundary_jitter_sigma: float = 0.0
    miss_rate: float = 0.0
    false_alarm_rate: float = 0.0
    label_swap_rate: float = 0.0
    sub_rate: float = 0.0
    ins_rate: float = 0.0
    del_rate: float = 0.0

    def __post_init__(self):
        if self.boundary_jitter_sigma < 0:
            raise ValueError("jitter sigma must be non-negative")
        for name in ("miss_rate", "false_alarm_rate", "label_swap_rate",
                     "sub_rate", "ins_rate", "del_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def _other_index(rng: Xoshiro256StarStar, n: int, current: int) -> int:
    """Uniform index in [0, n) excluding ``current`` (n >= 2)."""
    k = rng.randrange(n - 1)
    return k if k < current else k + 1


def _advance_seconds(mean_turn: float, ratio: float) -> float:
    """Onset advance hitting ``ratio`` overlap in expectation.

    The realised overlap of consecutive turns is min(advance, L_cur/2,
    L_next) with the turn lengths exponential; solving
    E[min] = mean_turn * ratio / (1 + ratio) for the advance gives the
    expression below.  ratio -> 0.5 is the model's supremum, where the
    advance diverges; it is capped, which already lands within 1e-8 of
    the limit.
    """
    if ratio <= 0:
        return 0.0
    x = 1.0 - 3.0 * ratio / (1.0 + ratio)
    if x < 1e-9:
        return 10.0 * mean_turn
    return -(mean_turn / 3.0) * math.log(x)


def gen_conversation(spec: ConversationSpec, recording: str = "sim") -> Annotation:
    """Seed-deterministic alternating-turn conversation."""
    rng = Xoshiro256StarStar(spec.seed)
    n = spec.n_speakers
    duration_t = seconds_to_ticks(spec.duration)
    advance_t = (
        seconds_to_ticks(_advance_seconds(spec.mean_turn, spec.overlap_ratio))
        if n > 1
        else 0
    )
    segments = []
    t = 0
    current = -1
    while t < duration_t:
        if current < 0:
            current = rng.randrange(n)
        elif n > 1:
            current = _other_index(rng, n, current)
        length_t = max(1, seconds_to_ticks(rng.exponential(spec.mean_turn)))
        offset = min(t + length_t, duration_t)
        segments.append(Segment(recording, f"spk{current}", t, offset - t))
        # next onset backs into this turn, never past its midpoint
        t = max(t + 1, offset - min(advance_t, (offset - t) // 2))
    return canonicalize(segments, recording=recording)


def indicator_posteriors(
    ann: Annotation, frame_shift: float, speakers=None
) -> PosteriorMatrix:
    """Exact {0,1} frame activity of an annotation (sampled at frame starts)."""
    shift_t = seconds_to_ticks(frame_shift)
    if shift_t <= 0:
        raise ValueError("frame_shift must be positive")
    if speakers is None:
        speakers = ann.speakers
    speakers = tuple(speakers)
    end_t = ann.extent_ticks()[1]
    n_frames = -(-end_t // shift_t)  # ceil
    values = np.zeros((int(n_frames), len(speakers)), dtype=np.float64)
    index = {spk: i for i, spk in enumerate(speakers)}
    for seg in ann.segments:
        col = index[seg.speaker]
        first = -(-seg.onset_ticks // shift_t)  # first frame start inside
        last = -(-seg.offset_ticks // shift_t)  # frames start strictly before offset
        values[first:last, col] = 1.0
    return PosteriorMatrix(ann.recording or "sim", shift_t, speakers, values)


def corrupt_annotation(ann: Annotation, spec: CorruptionSpec) -> Annotation:
    """Jitter boundaries, drop, relabel and insert segments, then canonicalize."""
    rng = Xoshiro256StarStar(spec.seed)
    speakers = list(ann.speakers)
    n_spk = len(speakers)
    if not ann.segments:
        return ann
    extent_t = ann.extent_ticks()[1]
    mean_dur = sum(s.duration_ticks for s in ann.segments) / len(ann.segments) / 10000.0

    out = []
    spk_index = {spk: i for i, spk in enumerate(speakers)}
    for seg in ann.segments:
        spurious = rng.uniform() < spec.false_alarm_rate
        if spurious:
            spk = speakers[rng.randrange(n_spk)]
            onset = rng.randrange(max(1, extent_t))
            length = max(1, seconds_to_ticks(rng.exponential(mean_dur)))
            out.append(Segment(seg.recording, spk, onset, length))
        if rng.uniform() < spec.miss_rate:
            continue
        onset_t, offset_t = seg.onset_ticks, seg.offset_ticks
        if spec.boundary_jitter_sigma > 0:
            onset_t = max(
                0, onset_t + seconds_to_ticks(rng.normal(0.0, spec.boundary_jitter_sigma))
            )
            offset_t = offset_t + seconds_to_ticks(
                rng.normal(0.0, spec.boundary_jitter_sigma)
            )
        duration_t = max(1, offset_t - onset_t)
        speaker = seg.speaker
        if n_spk > 1 and rng.uniform() < spec.label_swap_rate:
            speaker = speakers[_other_index(rng, n_spk, spk_index[seg.speaker])]
        out.append(Segment(seg.recording, speaker, onset_t, duration_t))
    return canonicalize(out, recording=ann.recording)


def corrupt_transcript(tokens, spec: CorruptionSpec, alphabet=None) -> tuple[str, ...]:
    """Independent per-token deletion, substitution and insertion-after.

    Substitutions always pick a different token; the replacement alphabet
    defaults to the input vocabulary.
    """
    tokens = [str(t) for t in tokens]
    if alphabet is None:
        alphabet = sorted(set(tokens))
    else:
        alphabet = list(alphabet)
    rng = Xoshiro256StarStar(spec.seed)
    out: list[str] = []
    for token in tokens:
        if rng.uniform() < spec.del_rate:
            continue
        if alphabet and rng.uniform() < spec.sub_rate:
            if token in alphabet and len(alphabet) > 1:
                token = alphabet[_other_index(rng, len(alphabet), alphabet.index(token))]
            elif token not in alphabet:
                token = alphabet[rng.randrange(len(alphabet))]
        out.append(token)
        if alphabet and rng.uniform() < spec.ins_rate:
            out.append(alphabet[rng.randrange(len(alphabet))])
    return tuple(out)


def gen_embeddings(
    seed: int,
    k: int,
    n_per_cluster: int,
    dim: int,
    noise_sigma: float,
    recording: str = "sim",
    max_center_cosine: float = 0.3,
) -> tuple[EmbeddingSet, np.ndarray]:
    """Gaussian clusters around unit-norm centers with bounded pairwise
    cosine; returns the embeddings plus the true labels (cluster-major,
    so every cluster has exactly n_per_cluster members)."""
    if k < 1 or n_per_cluster < 1 or dim < 1:
        raise ValueError("k, n_per_cluster and dim must be positive")
    rng = Xoshiro256StarStar(seed)
    centers = []
    attempts = 0
    while len(centers) < k:
        attempts += 1
        if attempts > 1000 * k:
            raise ValueError("could not place centers with the requested separation")
        vec = np.array([rng.normal() for _ in range(dim)])
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            continue
        vec /= norm
        if all(float(vec @ c) < max_center_cosine for c in centers):
            centers.append(vec)

    n_total = k * n_per_cluster
    vectors = np.empty((n_total, dim), dtype=np.float64)
    labels = np.empty(n_total, dtype=np.int64)
    row = 0
    for c in range(k):
        for _ in range(n_per_cluster):
            noise = np.array([rng.normal(0.0, noise_sigma) for _ in range(dim)])
            vectors[row] = centers[c] + noise
            labels[row] = c
            row += 1
    window_t = 10_000  # 1 s analysis windows, laid end to end
    windows = tuple((i * window_t, (i + 1) * window_t) for i in range(n_total))
    return EmbeddingSet(recording, dim, windows, vectors), labels


def gen_transcript_corpus(
    seed: int,
    n_utterances: int,
    tokens_per_utterance: int,
    vocab_size: int = 1000,
    recording: str = "sim",
    speaker: str = "spk0",
) -> tuple[TranscriptSet, list[str]]:
    """Random token utterances over a synthetic CJK-block vocabulary;
    returns the transcripts and the vocabulary (for corruption alphabets)."""
    if vocab_size < 2:
        raise ValueError("vocab_size must be >= 2")
    vocab = [chr(0x4E00 + i) for i in range(vocab_size)]
    rng = Xoshiro256StarStar(seed)
    entries = {}
    for u in range(n_utterances):
        tokens = tuple(vocab[rng.randrange(vocab_size)] for _ in range(tokens_per_utterance))
        onset_ms = u * 10_000
        key = (recording, speaker, onset_ms * 10, (onset_ms + 5_000) * 10)
        entries[key] = tokens
    return TranscriptSet(entries), vocab
