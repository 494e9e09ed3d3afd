"""Turn frame-level speaker activity posteriors into segments.

Decision chain per speaker track: sliding-median smoothing, hysteresis
binarisation (enter at >= onset threshold, leave at < offset threshold),
then segment building where gaps shorter than ``min_silence`` are merged
*before* segments shorter than ``min_speech`` are dropped.  That ordering
changes results, so it is fixed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import hysteresis, median_filter_1d
from .formats import PosteriorMatrix
from .timeline import Annotation, Segment, canonicalize, seconds_to_ticks

__all__ = [
    "PostProcessConfig",
    "median_filter",
    "binarize",
    "tracks_to_segments",
    "posteriors_to_annotation",
]


@dataclass(frozen=True)
class PostProcessConfig:
    median_window: int = 11
    onset_threshold: float = 0.5
    offset_threshold: float = 0.5
    min_speech: float = 0.2
    min_silence: float = 0.3

    def __post_init__(self):
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError("median_window must be odd and >= 1")
        if not 0.0 <= self.offset_threshold <= self.onset_threshold <= 1.0:
            raise ValueError("need 0 <= offset_threshold <= onset_threshold <= 1")
        if self.min_speech < 0 or self.min_silence < 0:
            raise ValueError("durations must be non-negative")


def median_filter(p: PosteriorMatrix, window: int) -> PosteriorMatrix:
    """Per-speaker sliding median with edge replication; shape preserved."""
    if window < 1 or window % 2 == 0:
        raise ValueError("median window must be odd and >= 1")
    if window == 1 or p.n_frames == 0:
        return p
    values = np.empty_like(p.values)
    for s in range(values.shape[1]):
        values[:, s] = median_filter_1d(np.ascontiguousarray(p.values[:, s]), window)
    return PosteriorMatrix(p.recording, p.frame_shift_ticks, p.speakers, values)


def binarize(p: PosteriorMatrix, cfg: PostProcessConfig) -> np.ndarray:
    """Hysteresis-threshold each speaker column into a boolean (T, S) array."""
    tracks = np.empty(p.values.shape, dtype=bool)
    for s in range(p.values.shape[1]):
        tracks[:, s] = hysteresis(
            np.ascontiguousarray(p.values[:, s]),
            cfg.onset_threshold,
            cfg.offset_threshold,
        ).astype(bool)
    return tracks


def _runs(track: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end) frame runs of True."""
    if track.size == 0:
        return []
    padded = np.concatenate(([False], track, [False]))
    change = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(change[0::2], change[1::2]))


def tracks_to_segments(
    tracks: np.ndarray,
    frame_shift: float,
    cfg: PostProcessConfig,
    recording: str,
    speakers,
) -> Annotation:
    """Active frame runs -> segments, then merge small gaps, then drop
    short segments (strictly shorter than the configured minima)."""
    shift_ticks = seconds_to_ticks(frame_shift)
    if shift_ticks <= 0:
        raise ValueError("frame_shift must be positive")
    if tracks.ndim != 2 or tracks.shape[1] != len(speakers):
        raise ValueError("tracks shape does not match speakers")
    min_silence_t = seconds_to_ticks(cfg.min_silence)
    min_speech_t = seconds_to_ticks(cfg.min_speech)

    segments = []
    for s, speaker in enumerate(speakers):
        spans = [
            (start * shift_ticks, end * shift_ticks) for start, end in _runs(tracks[:, s])
        ]
        merged: list[tuple[int, int]] = []
        for on, off in spans:
            if merged and on - merged[-1][1] < min_silence_t:
                merged[-1] = (merged[-1][0], off)
            else:
                merged.append((on, off))
        for on, off in merged:
            if off - on < min_speech_t:
                continue
            segments.append(Segment(recording, speaker, on, off - on))
    return canonicalize(segments, recording=recording)


def posteriors_to_annotation(p: PosteriorMatrix, cfg: PostProcessConfig) -> Annotation:
    """Full decision chain; deterministic for identical inputs."""
    smoothed = median_filter(p, cfg.median_window)
    tracks = binarize(smoothed, cfg)
    return tracks_to_segments(tracks, p.frame_shift, cfg, p.recording, p.speakers)
