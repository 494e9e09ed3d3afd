import numpy as np
import pytest

from oracles import brute_cpcer_distance, cached_edit_distance, recursive_edit_distance

from asdrkit.cer import EditCounts, cer, cpcer, edit_distance, graphemes
from asdrkit.formats import TranscriptSet


def ts(entries):
    return TranscriptSet({k: tuple(v) for k, v in entries.items()})


class TestGraphemes:
    def test_cjk(self):
        assert graphemes("你好") == ("你", "好")

    def test_combining_mark_attaches(self):
        assert graphemes("éf") == ("é", "f")


class TestEditDistance:
    def test_identity(self):
        assert edit_distance(("你", "好"), ("你", "好")) == EditCounts(0, 0, 0, 2)

    def test_single_substitution(self):
        assert edit_distance(list("abc"), list("axc")) == EditCounts(1, 0, 0, 3)

    def test_empty_sides(self):
        assert edit_distance((), list("abc")) == EditCounts(0, 0, 3, 0)
        assert edit_distance(list("abc"), ()) == EditCounts(0, 3, 0, 3)

    def test_tie_prefers_substitution(self):
        # "ab" -> "ba" is distance 2 either via 2 subs or del+ins
        counts = edit_distance(list("ab"), list("ba"))
        assert counts.distance == 2
        assert counts.substitutions == 2

    def test_vs_memoless_recursion_small(self):
        rng = np.random.default_rng(0)
        for _ in range(120):
            n, m = int(rng.integers(0, 8)), int(rng.integers(0, 8))
            ref = [str(x) for x in rng.integers(0, 4, n)]
            hyp = [str(x) for x in rng.integers(0, 4, m)]
            assert edit_distance(ref, hyp).distance == recursive_edit_distance(ref, hyp)

    def test_vs_recursion_len12(self):
        rng = np.random.default_rng(1)
        for _ in range(150):
            n, m = int(rng.integers(0, 13)), int(rng.integers(0, 13))
            ref = [str(x) for x in rng.integers(0, 4, n)]
            hyp = [str(x) for x in rng.integers(0, 4, m)]
            assert edit_distance(ref, hyp).distance == cached_edit_distance(ref, hyp)

    def test_symmetry_with_del_ins_exchange(self):
        rng = np.random.default_rng(2)
        for _ in range(80):
            ref = [str(x) for x in rng.integers(0, 5, int(rng.integers(0, 15)))]
            hyp = [str(x) for x in rng.integers(0, 5, int(rng.integers(0, 15)))]
            fwd = edit_distance(ref, hyp)
            rev = edit_distance(hyp, ref)
            assert fwd.distance == rev.distance

    def test_triangle_inequality(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            a, b, c = (
                [str(x) for x in rng.integers(0, 4, int(rng.integers(0, 12)))]
                for _ in range(3)
            )
            ab = edit_distance(a, b).distance
            bc = edit_distance(b, c).distance
            ac = edit_distance(a, c).distance
            assert ac <= ab + bc


class TestCer:
    def test_identity(self):
        data = ts({("r", "A", 0, 10000): "你好"})
        assert cer(data, data).rate == 0.0

    def test_missing_hypothesis_is_deletions(self):
        ref = ts({("r", "A", 0, 10000): "0123456789"})
        report = cer(ref, ts({}))
        assert report.rate == 1.0
        assert report.counts.deletions == 10

    def test_pooled_not_averaged(self):
        # lengths 5 and 15 with 1 and 3 errors pool to 4/20
        ref = ts({("r", "A", 0, 10000): "aaaaa", ("r", "A", 10000, 20000): "bbbbbbbbbbbbbbb"})
        hyp = ts({("r", "A", 0, 10000): "aaaax", ("r", "A", 10000, 20000): "bbbbbbbbbbbbyyy"})
        report = cer(ref, hyp)
        assert report.rate == pytest.approx(4 / 20)

    def test_extra_hypothesis_rejected(self):
        ref = ts({("r", "A", 0, 10000): "ab"})
        hyp = ts({("r", "A", 0, 10000): "ab", ("r", "B", 0, 10000): "xy"})
        with pytest.raises(ValueError, match="missing from reference"):
            cer(ref, hyp)

    def test_undefined_on_empty_reference(self):
        ref = ts({("r", "A", 0, 10000): ""})
        hyp = ts({("r", "A", 0, 10000): "xy"})
        report = cer(ref, hyp)
        assert report.rate is None
        assert report.counts.insertions == 2

    def test_token_unit(self):
        ref = ts({("r", "A", 0, 10000): ["hello", "world"]})
        hyp = ts({("r", "A", 0, 10000): ["hello", "word"]})
        assert cer(ref, hyp, unit="token").rate == 0.5
        assert cer(ref, hyp, unit="char").rate == pytest.approx(1 / 10)


class TestCpcer:
    def test_permutation_recovery(self):
        ref = ts({("r", "A", 0, 10000): "ab", ("r", "B", 0, 10000): "cd"})
        hyp = ts({("r", "1", 0, 10000): "cd", ("r", "2", 0, 10000): "ab"})
        report = cpcer(ref, hyp)
        assert report.rate == 0.0
        assert report.per_recording["r"].assignment == (("A", "2"), ("B", "1"))

    def test_unmatched_reference_is_deletions(self):
        ref = ts({("r", "A", 0, 10000): "abcd"})
        report = cpcer(ref, ts({}))
        assert report.rate == 1.0
        assert report.counts.deletions == 4

    def test_surplus_hypothesis_is_insertions(self):
        ref = ts({("r", "A", 0, 10000): "ab"})
        hyp = ts({("r", "1", 0, 10000): "ab", ("r", "2", 0, 10000): "xyz"})
        report = cpcer(ref, hyp)
        assert report.counts.insertions == 3
        assert report.counts.ref_len == 2
        assert len(report.per_recording["r"].assignment) == 1

    def test_concatenation_in_time_order(self):
        shuffled = ts(
            {
                ("r", "A", 20000, 30000): "cd",
                ("r", "A", 0, 10000): "ab",
            }
        )
        ordered = ts({("r", "A", 0, 40000): "abcd"})
        assert cpcer(ordered, shuffled).rate == 0.0

    def test_relabeling_invariance(self):
        ref = ts({("r", "A", 0, 10000): "abcab", ("r", "B", 0, 10000): "ddd"})
        hyp1 = ts({("r", "X", 0, 10000): "abab", ("r", "Y", 0, 10000): "dxd"})
        hyp2 = ts({("r", "Q", 0, 10000): "abab", ("r", "W", 0, 10000): "dxd"})
        assert cpcer(ref, hyp1).rate == cpcer(ref, hyp2).rate

    def test_vs_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            n_ref = int(rng.integers(0, 5))
            n_hyp = int(rng.integers(0, 5))
            ref_entries = {
                ("r", f"R{i}", j * 10000, (j + 1) * 10000): "".join(
                    str(x) for x in rng.integers(0, 4, int(rng.integers(0, 8)))
                )
                for i in range(n_ref)
                for j in [i]
            }
            hyp_entries = {
                ("r", f"H{i}", j * 10000, (j + 1) * 10000): "".join(
                    str(x) for x in rng.integers(0, 4, int(rng.integers(0, 8)))
                )
                for i in range(n_hyp)
                for j in [i]
            }
            report = cpcer(ts(ref_entries), ts(hyp_entries))
            ref_cat = {k[1]: v for k, v in ref_entries.items()}
            hyp_cat = {k[1]: v for k, v in hyp_entries.items()}
            assert report.counts.distance == brute_cpcer_distance(ref_cat, hyp_cat)

    def test_not_worse_than_any_fixed_map(self):
        ref = ts({("r", "A", 0, 10000): "abcabc", ("r", "B", 0, 10000): "defdef"})
        hyp = ts({("r", "X", 0, 10000): "abcbbc", ("r", "Y", 0, 10000): "defxef"})
        optimal = cpcer(ref, hyp).counts.distance
        for mapping in ({"A": "X", "B": "Y"}, {"A": "Y", "B": "X"}):
            fixed = sum(
                edit_distance(
                    tuple(ref.entries[("r", r, 0, 10000)]),
                    tuple(hyp.entries[("r", h, 0, 10000)]),
                ).distance
                for r, h in mapping.items()
            )
            assert optimal <= fixed

    def test_pooling_across_recordings(self):
        ref = ts({("r1", "A", 0, 10000): "aaaa", ("r2", "B", 0, 10000): "bb"})
        hyp = ts({("r1", "X", 0, 10000): "aaax", ("r2", "Y", 0, 10000): "bb"})
        report = cpcer(ref, hyp)
        assert report.rate == pytest.approx(1 / 6)
