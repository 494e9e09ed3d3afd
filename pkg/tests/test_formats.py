import numpy as np
import pytest

from asdrkit.formats import (
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
from asdrkit.simulate import ConversationSpec, gen_conversation
from asdrkit.timeline import Segment, canonicalize


class TestRttm:
    def test_parse_example_line(self):
        anns = parse_rttm("SPEAKER rec1 1 0.50 1.25 <NA> <NA> spkA <NA> <NA>")
        seg = anns["rec1"].segments[0]
        assert (seg.speaker, seg.onset, seg.duration) == ("spkA", 0.5, 1.25)

    def test_empty_input(self):
        assert parse_rttm("") == {}

    def test_non_positive_duration(self):
        with pytest.raises(ParseError) as err:
            parse_rttm("SPEAKER rec1 1 0.50 -1 <NA> <NA> spkA <NA> <NA>")
        assert err.value.line == 1
        assert "non-positive duration" in err.value.reason

    def test_other_record_types_skipped(self):
        text = (
            "NON-LEX rec1 1 0.5 0.2 <NA> <NA> spkA <NA> <NA>\n"
            "SPKR-INFO rec1 1 <NA> <NA> <NA> unknown spkA <NA> <NA>\n"
            "SPEAKER rec1 1 1.0 1.0 <NA> <NA> spkA <NA> <NA>\n"
        )
        anns = parse_rttm(text)
        assert len(anns["rec1"].segments) == 1

    def test_field_count_checked(self):
        with pytest.raises(ParseError, match="10 fields"):
            parse_rttm("SPEAKER rec1 1 0.5 1.0 <NA> spkA <NA> <NA>")

    def test_non_numeric_time(self):
        with pytest.raises(ParseError, match="non-numeric onset"):
            parse_rttm("SPEAKER rec1 1 x 1.0 <NA> <NA> spkA <NA> <NA>")

    def test_emit_exact_format(self):
        ann = canonicalize([Segment.from_seconds("rec1", "spkA", 0.5, 1.25)])
        assert emit_rttm(ann) == "SPEAKER rec1 1 0.5000 1.2500 <NA> <NA> spkA <NA> <NA>\n"

    def test_emit_empty(self):
        assert emit_rttm({}) == ""

    def test_recordings_sorted(self):
        anns = {
            "b": canonicalize([Segment.from_seconds("b", "x", 0, 1)]),
            "a": canonicalize([Segment.from_seconds("a", "x", 0, 1)]),
        }
        lines = emit_rttm(anns).splitlines()
        assert [l.split()[1] for l in lines] == ["a", "b"]

    def test_round_trip_simulated(self):
        for seed in range(40):
            spec = ConversationSpec(
                seed=seed, n_speakers=1 + seed % 4, duration=30.0, overlap_ratio=0.2
            )
            ann = gen_conversation(spec, recording=f"rec{seed}")
            assert parse_rttm(emit_rttm(ann)) == {f"rec{seed}": ann}

    def test_same_speaker_rows_canonicalized(self):
        text = (
            "SPEAKER rec1 1 0.0 2.0 <NA> <NA> A <NA> <NA>\n"
            "SPEAKER rec1 1 1.0 2.0 <NA> <NA> A <NA> <NA>\n"
        )
        ann = parse_rttm(text)["rec1"]
        assert len(ann.segments) == 1 and ann.segments[0].duration == 3.0


class TestUem:
    def test_parse(self):
        regions = parse_uem("rec1 1 0.0 60.0")
        assert regions["rec1"].regions == ((0, 600000),)

    def test_overlap_rejected(self):
        with pytest.raises(ParseError, match="overlapping scoring regions"):
            parse_uem("rec1 1 0.0 5.0\nrec1 1 4.0 8.0")

    def test_round_trip(self):
        text = "rec1 1 0.0000 60.0000\nrec2 1 5.0000 10.0000\n"
        assert emit_uem(parse_uem(text)) == text


class TestPosteriors:
    def test_parse_small(self):
        text = "#posteriors rec1 0.01 s1 s2\n1.0\t0.0\n0.0\t1.0\n"
        p = parse_posteriors(text)
        assert p.values.shape == (2, 2)
        assert p.frame_shift == 0.01
        assert p.speakers == ("s1", "s2")

    def test_out_of_range(self):
        with pytest.raises(ParseError, match="probability out of range at frame 0"):
            parse_posteriors("#posteriors rec1 0.01 s1\n1.5\n")

    def test_duplicate_speaker(self):
        with pytest.raises(ParseError, match="duplicate speaker"):
            parse_posteriors("#posteriors rec1 0.01 s1 s1\n")

    def test_ragged_row(self):
        with pytest.raises(ParseError, match="expected 2 values"):
            parse_posteriors("#posteriors rec1 0.01 s1 s2\n0.5\n")

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        values = rng.random((17, 3))
        p = PosteriorMatrix("rec1", 100, ("a", "b", "c"), values)
        q = parse_posteriors(emit_posteriors(p))
        assert q.values.shape == (17, 3)
        assert np.array_equal(q.values, values)
        assert (q.recording, q.frame_shift_ticks, q.speakers) == ("rec1", 100, ("a", "b", "c"))


class TestTranscripts:
    def test_parse_example(self):
        ts = parse_transcripts("rec1_spkA_000500_001750 你 好")
        assert ts.entries == {("rec1", "spkA", 5000, 17500): ("你", "好")}

    def test_empty_token_sequence(self):
        ts = parse_transcripts("rec1_spkA_000500_001750")
        assert ts.entries[("rec1", "spkA", 5000, 17500)] == ()

    def test_bad_id(self):
        with pytest.raises(ParseError, match="4 fields"):
            parse_transcripts("badid hello")

    def test_offset_before_onset(self):
        with pytest.raises(ParseError, match="offset must exceed onset"):
            parse_transcripts("rec1_spkA_001000_000500 x")

    def test_round_trip(self):
        text = "rec1_spkA_000500_001750 你 好\nrec1_spkB_002000_003000\n"
        assert emit_transcripts(parse_transcripts(text)) == text

    def test_emit_rejects_underscore_labels(self):
        ts = TranscriptSet({("re_c", "spk", 0, 1000): ("x",)})
        with pytest.raises(ValueError, match="not expressible"):
            emit_transcripts(ts)


class TestEmbeddings:
    def test_parse(self):
        text = "#embeddings rec1 3\n0.0 1.5 0.1 0.2 0.3\n1.5 3.0 0.4 0.5 0.6\n"
        e = parse_embeddings(text)
        assert e.dim == 3 and len(e) == 2
        assert e.windows[0] == (0, 15000)

    def test_dim_mismatch(self):
        with pytest.raises(ParseError, match="expected 5 fields"):
            parse_embeddings("#embeddings rec1 3\n0.0 1.5 0.1 0.2\n")

    def test_non_finite_rejected(self):
        with pytest.raises(ParseError, match="non-finite"):
            parse_embeddings("#embeddings rec1 2\n0.0 1.5 nan 0.2\n")

    def test_round_trip(self):
        vectors = np.array([[0.125, -1.5], [3.25, 0.0]])
        e = EmbeddingSet("rec1", 2, ((0, 15000), (15000, 30000)), vectors)
        q = parse_embeddings(emit_embeddings(e))
        assert np.array_equal(q.vectors, vectors)
        assert q.windows == e.windows


class TestTotality:
    """Parsers must never raise anything but ParseError."""

    @pytest.mark.parametrize(
        "parser",
        [parse_rttm, parse_uem, parse_posteriors, parse_transcripts, parse_embeddings],
    )
    def test_fuzz_smoke(self, parser):
        rng = np.random.default_rng(1234)
        prefixes = [b"", b"#posteriors ", b"#embeddings ", b"SPEAKER "]
        for i in range(4000):
            blob = rng.integers(0, 256, size=int(rng.integers(0, 48))).astype(np.uint8).tobytes()
            data = prefixes[i % len(prefixes)] + blob
            try:
                parser(data)
            except ParseError:
                pass
