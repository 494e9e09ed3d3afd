"""Parsers and emitters for the pipeline interchange files.

Formats (UTF-8, LF):

* RTTM       -- 10 space-separated fields per line; only SPEAKER records
                carry segments, other record types are skipped.
* UEM        -- ``<recording> 1 <onset> <offset>`` scoring regions.
* posteriors -- ``#posteriors <recording> <frame_shift> <spk...>`` header,
                then one tab-separated row of probabilities per frame.
* embeddings -- ``#embeddings <recording> <dim>`` header, then
                ``<onset> <offset> v1 ... vdim`` rows.
* transcripts-- ``<recording>_<speaker>_<onset-ms>_<offset-ms> <tokens...>``
                one utterance per line; the 4-field id keeps recording and
                speaker labels underscore-free.

Parsers are total: any input yields either a value or a ``ParseError``
with a 1-based line number; arbitrary bytes never raise anything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

import numpy as np

from .timeline import (
    Annotation,
    ScoringRegionSet,
    Segment,
    TICKS_PER_SECOND,
    canonicalize,
    seconds_to_ticks,
)

__all__ = [
    "ParseError",
    "PosteriorMatrix",
    "TranscriptSet",
    "EmbeddingSet",
    "parse_rttm",
    "emit_rttm",
    "parse_uem",
    "emit_uem",
    "parse_posteriors",
    "emit_posteriors",
    "parse_transcripts",
    "emit_transcripts",
    "parse_embeddings",
    "emit_embeddings",
]


class ParseError(ValueError):
    """Malformed input; carries the 1-based line number."""

    def __init__(self, reason: str, line: int | None = None):
        self.reason = reason
        self.line = line
        super().__init__(f"line {line}: {reason}" if line is not None else reason)


def _read_lines(source) -> list[str]:
    if isinstance(source, bytes):
        text = source.decode("utf-8", errors="replace")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8", errors="replace")
        text = data
    return text.splitlines()


def _time_ticks(token: str, what: str, lineno: int) -> int:
    try:
        return seconds_to_ticks(token)
    except ValueError:
        raise ParseError(f"non-numeric {what}: {token!r}", lineno) from None


def _label(token: str, what: str, lineno: int) -> str:
    if not token or any(ch.isspace() for ch in token):
        raise ParseError(f"bad {what}: {token!r}", lineno)
    return token


def _format_ticks(ticks: int) -> str:
    sign = "-" if ticks < 0 else ""
    ticks = abs(ticks)
    return f"{sign}{ticks // TICKS_PER_SECOND}.{ticks % TICKS_PER_SECOND:04d}"


# ---------------------------------------------------------------------------
# RTTM
# ---------------------------------------------------------------------------


def parse_rttm(source) -> dict[str, Annotation]:
    """Parse RTTM text into one canonical Annotation per recording."""
    per_rec: dict[str, list[Segment]] = {}
    for lineno, line in enumerate(_read_lines(source), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if fields[0] != "SPEAKER":
            continue  # NON-LEX and friends travel in real RTTM files
        if len(fields) != 10:
            raise ParseError(
                f"SPEAKER record needs 10 fields, got {len(fields)}", lineno
            )
        rec = _label(fields[1], "recording", lineno)
        onset = _time_ticks(fields[3], "onset", lineno)
        duration = _time_ticks(fields[4], "duration", lineno)
        if duration <= 0:
            raise ParseError("non-positive duration", lineno)
        if onset < 0:
            raise ParseError("negative onset", lineno)
        speaker = _label(fields[7], "speaker", lineno)
        per_rec.setdefault(rec, []).append(Segment(rec, speaker, onset, duration))
    return {rec: canonicalize(segs) for rec, segs in per_rec.items()}


def emit_rttm(annotations) -> str:
    """Emit SPEAKER lines, recordings in lexicographic order, 4-decimal times."""
    anns = _as_annotation_map(annotations)
    lines = []
    for rec in sorted(anns):
        for seg in anns[rec].segments:
            lines.append(
                f"SPEAKER {rec} 1 {_format_ticks(seg.onset_ticks)} "
                f"{_format_ticks(seg.duration_ticks)} <NA> <NA> {seg.speaker} <NA> <NA>"
            )
    return "".join(line + "\n" for line in lines)


def _as_annotation_map(annotations) -> dict[str, Annotation]:
    if isinstance(annotations, Annotation):
        return {annotations.recording: annotations}
    if isinstance(annotations, Mapping):
        return dict(annotations)
    return {a.recording: a for a in annotations}


# ---------------------------------------------------------------------------
# UEM
# ---------------------------------------------------------------------------


def parse_uem(source) -> dict[str, ScoringRegionSet]:
    per_rec: dict[str, list[tuple[int, int]]] = {}
    for lineno, line in enumerate(_read_lines(source), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"UEM line needs 4 fields, got {len(fields)}", lineno)
        rec = _label(fields[0], "recording", lineno)
        onset = _time_ticks(fields[2], "onset", lineno)
        offset = _time_ticks(fields[3], "offset", lineno)
        if offset <= onset:
            raise ParseError("empty scoring region", lineno)
        if onset < 0:
            raise ParseError("negative onset", lineno)
        per_rec.setdefault(rec, []).append((onset, offset))
    out = {}
    for rec, regions in per_rec.items():
        regions.sort()
        for (a_on, a_off), (b_on, _) in zip(regions, regions[1:]):
            if b_on < a_off:
                raise ParseError(f"overlapping scoring regions for {rec!r}")
        out[rec] = ScoringRegionSet(rec, tuple(regions))
    return out


def emit_uem(regions) -> str:
    if isinstance(regions, ScoringRegionSet):
        regions = {regions.recording: regions}
    lines = []
    for rec in sorted(regions):
        for onset, offset in regions[rec].regions:
            lines.append(f"{rec} 1 {_format_ticks(onset)} {_format_ticks(offset)}")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Posteriors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    """Frame-by-speaker activity probabilities from a target-speaker VAD."""

    recording: str
    frame_shift_ticks: int
    speakers: tuple[str, ...]
    values: np.ndarray  # (T, S) float64 in [0, 1]

    def __post_init__(self):
        if self.frame_shift_ticks <= 0:
            raise ValueError("frame_shift must be positive")
        if len(self.speakers) < 1:
            raise ValueError("need at least one speaker")
        if len(set(self.speakers)) != len(self.speakers):
            raise ValueError("duplicate speaker labels")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.speakers):
            raise ValueError("values shape does not match speakers")
        if self.values.size and (
            not np.isfinite(self.values).all()
            or self.values.min() < 0.0
            or self.values.max() > 1.0
        ):
            raise ValueError("probabilities outside [0, 1]")

    @property
    def frame_shift(self) -> float:
        return self.frame_shift_ticks / TICKS_PER_SECOND

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


def parse_posteriors(source) -> PosteriorMatrix:
    lines = _read_lines(source)
    if not lines or not lines[0].startswith("#posteriors"):
        raise ParseError("missing '#posteriors' header", 1)
    head = lines[0].split()
    if len(head) < 4:
        raise ParseError("header needs recording, frame_shift and speakers", 1)
    rec = _label(head[1], "recording", 1)
    shift = _time_ticks(head[2], "frame_shift", 1)
    if shift <= 0:
        raise ParseError("non-positive frame_shift", 1)
    speakers = tuple(head[3:])
    if len(set(speakers)) != len(speakers):
        raise ParseError("duplicate speaker", 1)
    n_spk = len(speakers)
    rows = []
    frame = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != n_spk:
            raise ParseError(
                f"expected {n_spk} values, got {len(cells)} at frame {frame}", lineno
            )
        row = np.empty(n_spk, dtype=np.float64)
        for k, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric probability {cell!r}", lineno) from None
            if not (0.0 <= value <= 1.0):
                raise ParseError(f"probability out of range at frame {frame}", lineno)
            row[k] = value
        rows.append(row)
        frame += 1
    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, n_spk))
    try:
        return PosteriorMatrix(rec, shift, speakers, values)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def emit_posteriors(p: PosteriorMatrix) -> str:
    head = f"#posteriors {p.recording} {_format_ticks(p.frame_shift_ticks)} " + " ".join(
        p.speakers
    )
    body = "".join(
        "\t".join(repr(float(v)) for v in row) + "\n" for row in p.values
    )
    return head + "\n" + body


# ---------------------------------------------------------------------------
# Transcripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptSet:
    """Token sequences keyed by (recording, speaker, onset_ticks, offset_ticks)."""

    entries: dict[tuple[str, str, int, int], tuple[str, ...]] = field(
        default_factory=dict
    )

    def __post_init__(self):
        for key, tokens in self.entries.items():
            rec, spk, onset, offset = key
            if offset <= onset:
                raise ValueError(f"empty utterance interval in key {key!r}")
            if not isinstance(tokens, tuple):
                raise ValueError("token sequences must be tuples")

    def recordings(self) -> tuple[str, ...]:
        return tuple(sorted({k[0] for k in self.entries}))

    def by_recording_speaker(self) -> dict[str, dict[str, list]]:
        """recording -> speaker -> [(onset, offset, tokens)] in time order."""
        out: dict[str, dict[str, list]] = {}
        for (rec, spk, onset, offset), tokens in self.entries.items():
            out.setdefault(rec, {}).setdefault(spk, []).append((onset, offset, tokens))
        for speakers in out.values():
            for utts in speakers.values():
                utts.sort(key=lambda u: (u[0], u[1]))
        return out


def parse_transcripts(source) -> TranscriptSet:
    entries: dict[tuple[str, str, int, int], tuple[str, ...]] = {}
    for lineno, line in enumerate(_read_lines(source), start=1):
        if not line.strip():
            continue
        parts = line.split()
        utt_id, tokens = parts[0], tuple(parts[1:])
        id_fields = utt_id.split("_")
        if len(id_fields) != 4 or not all(id_fields):
            raise ParseError("utterance id must have 4 fields", lineno)
        rec, spk, onset_ms, offset_ms = id_fields
        try:
            onset = int(onset_ms) * 10
            offset = int(offset_ms) * 10
        except ValueError:
            raise ParseError(f"non-numeric utterance time in {utt_id!r}", lineno) from None
        if onset < 0:
            raise ParseError("negative utterance onset", lineno)
        if offset <= onset:
            raise ParseError("utterance offset must exceed onset", lineno)
        key = (rec, spk, onset, offset)
        if key in entries:
            raise ParseError(f"duplicate utterance id {utt_id!r}", lineno)
        entries[key] = tokens
    return TranscriptSet(entries)


def emit_transcripts(ts: TranscriptSet) -> str:
    lines = []
    for key in sorted(ts.entries):
        rec, spk, onset, offset = key
        for label, what in ((rec, "recording"), (spk, "speaker")):
            if "_" in label or not label or any(c.isspace() for c in label):
                raise ValueError(f"{what} label not expressible in utterance id: {label!r}")
        if onset % 10 or offset % 10:
            raise ValueError("utterance times must lie on the millisecond grid")
        utt_id = f"{rec}_{spk}_{onset // 10:06d}_{offset // 10:06d}"
        tokens = ts.entries[key]
        lines.append(utt_id + (" " + " ".join(tokens) if tokens else ""))
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Windowed speaker-embedding vectors consumed by clustering."""

    recording: str
    dim: int
    windows: tuple[tuple[int, int], ...]  # (onset_ticks, offset_ticks)
    vectors: np.ndarray  # (n, dim) float64

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.vectors.shape != (len(self.windows), self.dim):
            raise ValueError("vectors shape does not match windows/dim")
        if self.vectors.size and not np.isfinite(self.vectors).all():
            raise ValueError("non-finite embedding component")
        for onset, offset in self.windows:
            if offset <= onset:
                raise ValueError("empty embedding window")

    def __len__(self) -> int:
        return len(self.windows)


def parse_embeddings(source) -> EmbeddingSet:
    lines = _read_lines(source)
    if not lines or not lines[0].startswith("#embeddings"):
        raise ParseError("missing '#embeddings' header", 1)
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("header needs recording and dim", 1)
    rec = _label(head[1], "recording", 1)
    try:
        dim = int(head[2])
    except ValueError:
        raise ParseError(f"non-numeric dim {head[2]!r}", 1) from None
    if dim < 1:
        raise ParseError("dim must be positive", 1)
    windows = []
    vectors = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split()
        if len(cells) != dim + 2:
            raise ParseError(
                f"expected {dim + 2} fields, got {len(cells)}", lineno
            )
        onset = _time_ticks(cells[0], "onset", lineno)
        offset = _time_ticks(cells[1], "offset", lineno)
        if offset <= onset:
            raise ParseError("empty embedding window", lineno)
        if onset < 0:
            raise ParseError("negative onset", lineno)
        try:
            vec = [float(c) for c in cells[2:]]
        except ValueError:
            raise ParseError("non-numeric embedding component", lineno) from None
        if not all(math.isfinite(v) for v in vec):
            raise ParseError("non-finite embedding component", lineno)
        windows.append((onset, offset))
        vectors.append(vec)
    mat = np.array(vectors, dtype=np.float64) if vectors else np.empty((0, dim))
    return EmbeddingSet(rec, dim, tuple(windows), mat)


def emit_embeddings(e: EmbeddingSet) -> str:
    head = f"#embeddings {e.recording} {e.dim}"
    lines = [head]
    for (onset, offset), vec in zip(e.windows, e.vectors):
        lines.append(
            f"{_format_ticks(onset)} {_format_ticks(offset)} "
            + " ".join(repr(float(v)) for v in vec)
        )
    return "".join(line + "\n" for line in lines)
