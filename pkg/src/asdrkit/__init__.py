"""asdrkit: scoring and fusion toolkit for multi-speaker diarization + ASR.

Covers the evaluation-and-fusion core of a modular diarization/recognition
pipeline: RTTM/UEM/posterior/embedding/transcript interchange formats,
TS-VAD posterior post-processing, NME-SC speaker clustering, DOVER-Lap
style diarization fusion, ROVER transcript fusion, and the DER / CER /
cpCER metrics with their brute-force oracles.
"""

from ._backend import BACKEND
from .assignment import Assignment, brute_force, solve_min_cost
from .cer import (
    CerReport,
    CpcerReport,
    EditCounts,
    cer,
    cpcer,
    edit_distance,
    graphemes,
)
from .der import (
    DerReport,
    absolute_reduction,
    combine_reports,
    compute_der,
    compute_der_corpus,
    optimal_speaker_mapping,
)
from .dover import RankedHypothesis, fuse, make_ranked, map_labels, rank_weights
from .formats import (
    EmbeddingSet,
    ParseError,
    PosteriorMatrix,
    TranscriptSet,
    emit_embeddings,
    emit_posteriors,
    emit_rttm,
    emit_transcripts,
    emit_uem,
    parse_embeddings,
    parse_posteriors,
    parse_rttm,
    parse_transcripts,
    parse_uem,
)
from .nmesc import (
    NmeResult,
    binarize_symmetrize,
    cosine_affinity,
    labels_to_annotation,
    nme_tune,
    nmesc_cluster,
    spectral_cluster,
)
from .rng import Xoshiro256StarStar
from .rover import WordTransitionNetwork, build_wtn, fuse_transcripts, vote
from .simulate import (
    ConversationSpec,
    CorruptionSpec,
    corrupt_annotation,
    corrupt_transcript,
    gen_conversation,
    gen_embeddings,
    gen_transcript_corpus,
    indicator_posteriors,
)
from .timeline import (
    Annotation,
    ScoringRegionSet,
    Segment,
    canonicalize,
    crop,
    seconds_to_ticks,
    ticks_to_seconds,
    total_speech,
)
from .tsvad import (
    PostProcessConfig,
    binarize,
    median_filter,
    posteriors_to_annotation,
    tracks_to_segments,
)

__version__ = "0.1.0"
