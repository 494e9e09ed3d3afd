"""Speaker-attributed timeline value types.

Times live on an integer tick grid of 1e-4 s: exact interval arithmetic,
no floating-point sweep-line pathologies, and finer than the 4 decimal
places RTTM files print.  Conversions from seconds round half-up.  All
values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext, ROUND_HALF_UP
from typing import Iterable, Mapping, Sequence

TICKS_PER_SECOND = 10_000

__all__ = [
    "TICKS_PER_SECOND",
    "seconds_to_ticks",
    "ticks_to_seconds",
    "Segment",
    "Annotation",
    "ScoringRegionSet",
    "canonicalize",
    "total_speech",
    "crop",
]


def seconds_to_ticks(value) -> int:
    """Convert seconds to ticks, rounding half-up (half away from zero)."""
    if isinstance(value, int):
        return value * TICKS_PER_SECOND
    try:
        d = Decimal(value) if not isinstance(value, Decimal) else value
    except (InvalidOperation, ValueError, TypeError):
        raise ValueError(f"not a time value: {value!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite time value: {value!r}")
    with localcontext() as ctx:
        ctx.prec = 40
        ticks = (d * TICKS_PER_SECOND).to_integral_value(rounding=ROUND_HALF_UP)
    return int(ticks)


def ticks_to_seconds(ticks: int) -> float:
    return ticks / TICKS_PER_SECOND


def _check_label(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string")
    if any(ch.isspace() for ch in value):
        raise ValueError(f"{what} must not contain whitespace: {value!r}")


@dataclass(frozen=True, slots=True)
class Segment:
    """One speaker turn: a half-open interval [onset, onset + duration)."""

    recording: str
    speaker: str
    onset_ticks: int
    duration_ticks: int

    def __post_init__(self):
        _check_label(self.recording, "recording")
        _check_label(self.speaker, "speaker")
        if self.onset_ticks < 0:
            raise ValueError(f"negative onset: {self.onset_ticks} ticks")
        if self.duration_ticks <= 0:
            raise ValueError(f"non-positive duration: {self.duration_ticks} ticks")

    @classmethod
    def from_seconds(cls, recording: str, speaker: str, onset, duration) -> "Segment":
        return cls(recording, speaker, seconds_to_ticks(onset), seconds_to_ticks(duration))

    @property
    def onset(self) -> float:
        return self.onset_ticks / TICKS_PER_SECOND

    @property
    def duration(self) -> float:
        return self.duration_ticks / TICKS_PER_SECOND

    @property
    def offset_ticks(self) -> int:
        return self.onset_ticks + self.duration_ticks

    @property
    def offset(self) -> float:
        return self.offset_ticks / TICKS_PER_SECOND

    def sort_key(self):
        return (self.onset_ticks, self.speaker, self.duration_ticks)


@dataclass(frozen=True, slots=True)
class Annotation:
    """Canonically ordered speaker segments for one recording.

    Sort order is (onset, speaker, duration); same-speaker segments never
    overlap or abut (``canonicalize`` merges them), different-speaker
    segments may overlap.  Build instances through ``canonicalize``.
    """

    recording: str
    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not isinstance(self.segments, tuple):
            raise ValueError("segments must be a tuple (use canonicalize())")
        if self.segments:
            _check_label(self.recording, "recording")
        last_key = None
        last_offset: dict[str, int] = {}
        for seg in self.segments:
            if seg.recording != self.recording:
                raise ValueError(
                    f"segment recording {seg.recording!r} != annotation {self.recording!r}"
                )
            key = seg.sort_key()
            if last_key is not None and key < last_key:
                raise ValueError("segments not in canonical order")
            last_key = key
            prev = last_offset.get(seg.speaker)
            if prev is not None and seg.onset_ticks < prev:
                raise ValueError(f"same-speaker overlap for {seg.speaker!r}")
            last_offset[seg.speaker] = max(
                seg.offset_ticks, prev if prev is not None else 0
            )

    def __len__(self) -> int:
        return len(self.segments)

    def __bool__(self) -> bool:
        return bool(self.segments)

    @property
    def speakers(self) -> tuple[str, ...]:
        return tuple(sorted({s.speaker for s in self.segments}))

    def intervals_by_speaker(self) -> dict[str, list[tuple[int, int]]]:
        """Merged, sorted (onset, offset) tick intervals per speaker."""
        out: dict[str, list[tuple[int, int]]] = {}
        for seg in self.segments:
            out.setdefault(seg.speaker, []).append((seg.onset_ticks, seg.offset_ticks))
        return out

    def extent_ticks(self) -> tuple[int, int]:
        if not self.segments:
            return (0, 0)
        return (
            min(s.onset_ticks for s in self.segments),
            max(s.offset_ticks for s in self.segments),
        )


@dataclass(frozen=True, slots=True)
class ScoringRegionSet:
    """Disjoint, sorted evaluation windows for one recording (UEM-style)."""

    recording: str
    regions: tuple[tuple[int, int], ...]  # (onset_ticks, offset_ticks)

    def __post_init__(self):
        _check_label(self.recording, "recording")
        prev_off = None
        for onset, offset in self.regions:
            if offset <= onset:
                raise ValueError(f"empty scoring region ({onset}, {offset})")
            if onset < 0:
                raise ValueError("negative region onset")
            if prev_off is not None and onset < prev_off:
                raise ValueError("overlapping scoring regions")
            prev_off = offset

    @classmethod
    def from_seconds(cls, recording: str, regions: Iterable[tuple]) -> "ScoringRegionSet":
        ticks = sorted(
            (seconds_to_ticks(a), seconds_to_ticks(b)) for a, b in regions
        )
        return cls(recording, tuple(ticks))

    def total_ticks(self) -> int:
        return sum(b - a for a, b in self.regions)


def canonicalize(segments: Iterable[Segment], recording: str | None = None) -> Annotation:
    """Sort segments and merge same-speaker overlapping or abutting ones.

    All segments must share one recording id; pass ``recording=`` to name
    an empty annotation.  Merging treats a gap of zero as contiguous.
    """
    segs = list(segments)
    if not segs:
        return Annotation(recording if recording is not None else "", ())
    recs = {s.recording for s in segs}
    if recording is not None:
        recs.add(recording)
    if len(recs) > 1:
        raise ValueError(f"mixed recording ids: {', '.join(sorted(recs))}")
    rec = recs.pop()

    by_speaker: dict[str, list[Segment]] = {}
    for seg in segs:
        by_speaker.setdefault(seg.speaker, []).append(seg)

    merged: list[Segment] = []
    for speaker, group in by_speaker.items():
        group.sort(key=lambda s: (s.onset_ticks, s.offset_ticks))
        cur_on, cur_off = group[0].onset_ticks, group[0].offset_ticks
        for seg in group[1:]:
            if seg.onset_ticks <= cur_off:
                cur_off = max(cur_off, seg.offset_ticks)
            else:
                merged.append(Segment(rec, speaker, cur_on, cur_off - cur_on))
                cur_on, cur_off = seg.onset_ticks, seg.offset_ticks
        merged.append(Segment(rec, speaker, cur_on, cur_off - cur_on))

    merged.sort(key=Segment.sort_key)
    return Annotation(rec, tuple(merged))


def _clip_ticks(onset: int, offset: int, regions: ScoringRegionSet) -> list[tuple[int, int]]:
    parts = []
    for r_on, r_off in regions.regions:
        lo = max(onset, r_on)
        hi = min(offset, r_off)
        if hi > lo:
            parts.append((lo, hi))
        if r_on >= offset:
            break
    return parts


def total_speech(ann: Annotation, regions: ScoringRegionSet | None = None) -> float:
    """Total speech time in seconds; overlapped speech counts per speaker."""
    if regions is None:
        ticks = sum(s.duration_ticks for s in ann.segments)
    else:
        ticks = sum(
            hi - lo
            for seg in ann.segments
            for lo, hi in _clip_ticks(seg.onset_ticks, seg.offset_ticks, regions)
        )
    return ticks / TICKS_PER_SECOND


def crop(ann: Annotation, regions: ScoringRegionSet | None) -> Annotation:
    """Restrict an annotation to the scoring regions (segments may split)."""
    if regions is None:
        return ann
    out = []
    for seg in ann.segments:
        for lo, hi in _clip_ticks(seg.onset_ticks, seg.offset_ticks, regions):
            out.append(Segment(seg.recording, seg.speaker, lo, hi - lo))
    return canonicalize(out, recording=ann.recording)
