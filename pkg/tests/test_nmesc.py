import numpy as np
import pytest

from oracles import clustering_purity

from asdrkit.formats import EmbeddingSet
from asdrkit.nmesc import (
    binarize_symmetrize,
    cosine_affinity,
    labels_to_annotation,
    nme_tune,
    nmesc_cluster,
    spectral_cluster,
)
from asdrkit.simulate import gen_embeddings


def embedding_set(vectors):
    vectors = np.asarray(vectors, dtype=float)
    n = len(vectors)
    windows = tuple((i * 10000, (i + 1) * 10000) for i in range(n))
    return EmbeddingSet("rec1", vectors.shape[1], windows, vectors)


class TestCosineAffinity:
    def test_orthogonal(self):
        a = cosine_affinity(embedding_set([[1, 0], [0, 1]]))
        assert a[0, 1] == 0.0
        assert a[0, 0] == 1.0

    def test_identical(self):
        a = cosine_affinity(embedding_set([[1, 1], [2, 2]]))
        assert np.allclose(a, 1.0)

    def test_antiparallel(self):
        a = cosine_affinity(embedding_set([[1, 0], [-2, 0]]))
        assert a[0, 1] == -1.0

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            cosine_affinity(embedding_set([[0, 0], [1, 0]]))

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(0)
        a = cosine_affinity(embedding_set(rng.normal(size=(20, 8))))
        assert np.array_equal(a, a.T)
        assert a.min() >= -1.0 and a.max() <= 1.0


class TestBinarizeSymmetrize:
    def test_full_p(self):
        rng = np.random.default_rng(1)
        a = cosine_affinity(embedding_set(rng.normal(size=(6, 4))))
        b = binarize_symmetrize(a, 5)
        off = b[~np.eye(6, dtype=bool)]
        assert (off == 1.0).all()

    def test_mutual_pair_links(self):
        # two identical embeddings plus one orthogonal, p=1: the identical
        # pair links mutually (1); links to the loner are at most one-sided
        a = cosine_affinity(embedding_set([[1, 0], [1, 0], [0, 1]]))
        b = binarize_symmetrize(a, 1)
        assert b[0, 1] == 1.0
        assert b[0, 2] in (0.0, 0.5) and b[1, 2] in (0.0, 0.5)

    def test_tie_prefers_lower_column(self):
        a = np.array(
            [
                [1.0, 0.5, 0.5, 0.2],
                [0.5, 1.0, 0.2, 0.2],
                [0.5, 0.2, 1.0, 0.2],
                [0.2, 0.2, 0.2, 1.0],
            ]
        )
        b = binarize_symmetrize(a, 1)
        # row 0 ties between columns 1 and 2 at 0.5: column 1 must win, and
        # rows 1 and 2 both pick column 0, so after symmetrisation the 0-1
        # link is mutual while 0-2 stays one-sided
        assert b[0, 1] == 1.0
        assert b[0, 2] == 0.5
        assert b[1, 2] == 0.0

    def test_row_sums_exactly_p(self):
        rng = np.random.default_rng(2)
        a = cosine_affinity(embedding_set(rng.normal(size=(15, 6))))
        for p in (1, 3, 7, 14):
            scores = a.copy()
            np.fill_diagonal(scores, -np.inf)
            b = binarize_symmetrize(a, p)
            # (B + B^T)/2 has row sums in [p/2, p] and doubles back to ints
            doubled = 2 * b
            assert np.allclose(doubled, np.round(doubled))
            assert set(np.unique(b)) <= {0.0, 0.5, 1.0}

    def test_p_out_of_range(self):
        a = np.eye(4)
        with pytest.raises(ValueError):
            binarize_symmetrize(a, 0)
        with pytest.raises(ValueError):
            binarize_symmetrize(a, 4)


class TestNmeTune:
    def test_two_separated_blocks(self):
        # two groups of five identical embeddings; at p = 4 the binarised
        # graph is exactly two disjoint K5s, whose Laplacian spectrum is
        # {0, 0} + {5} * 8, so the k=2 eigengap of 5 dominates
        vectors = [[1, 0]] * 5 + [[0, 1]] * 5
        affinity = cosine_affinity(embedding_set(vectors))
        b = binarize_symmetrize(affinity, 4)
        lam = np.linalg.eigvalsh(np.diag(b.sum(axis=1)) - b)
        assert np.allclose(lam, [0.0, 0.0] + [5.0] * 8, atol=1e-9)
        assert nme_tune(affinity, p_candidates=[4], max_speakers=4).est_speakers == 2
        # and the p-sweep criterion lands on a p that reads off 2 speakers
        assert nme_tune(affinity, max_speakers=4).est_speakers == 2

    def test_single_cluster(self):
        # all-identical embeddings at p = n-1: the complete graph has a
        # single zero eigenvalue separated from the n-fold cluster at n
        vectors = [[1.0, 0.0]] * 8
        affinity = cosine_affinity(embedding_set(vectors))
        assert nme_tune(affinity, p_candidates=[7], max_speakers=4).est_speakers == 1

    def test_single_cluster_noisy_default_sweep(self):
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            v = np.array([1.0, 0, 0, 0]) + 0.05 * rng.normal(size=(24, 4))
            result = nme_tune(cosine_affinity(embedding_set(v)), max_speakers=4)
            hits += result.est_speakers == 1
        assert hits >= 17

    def test_laplacian_psd(self):
        emb, _ = gen_embeddings(seed=0, k=3, n_per_cluster=10, dim=16, noise_sigma=0.05)
        affinity = cosine_affinity(emb)
        for p in (1, 5, 10):
            b = binarize_symmetrize(affinity, p)
            lam = np.linalg.eigvalsh(np.diag(b.sum(axis=1)) - b)
            assert lam.min() >= -1e-9
            assert lam[0] <= 1e-9

    def test_four_cluster_fixture(self):
        hits = 0
        for seed in range(20):
            emb, truth = gen_embeddings(seed=seed, k=4, n_per_cluster=20, dim=32, noise_sigma=0.05)
            labels, result = nmesc_cluster(emb, max_speakers=4, seed=seed)
            if result.est_speakers == 4 and clustering_purity(labels, truth) >= 0.95:
                hits += 1
        assert hits >= 19

    def test_scale_invariance(self):
        emb, _ = gen_embeddings(seed=5, k=3, n_per_cluster=12, dim=16, noise_sigma=0.05)
        scaled = EmbeddingSet(emb.recording, emb.dim, emb.windows, emb.vectors * 7.5)
        a1 = cosine_affinity(emb)
        a2 = cosine_affinity(scaled)
        r1 = nme_tune(a1, max_speakers=4)
        r2 = nme_tune(a2, max_speakers=4)
        assert r1.est_speakers == r2.est_speakers


class TestSpectralCluster:
    def test_k_one(self):
        a = np.eye(5)
        assert spectral_cluster(a, 1).tolist() == [0] * 5

    def test_k_exceeds_n(self):
        with pytest.raises(ValueError):
            spectral_cluster(np.eye(3), 4)

    def test_disconnected_blocks(self):
        a = np.zeros((6, 6))
        a[:3, :3] = 1.0
        a[3:, 3:] = 1.0
        labels = spectral_cluster(a, 2, seed=0)
        assert labels[:3].tolist() == [0, 0, 0]
        assert labels[3:].tolist() == [1, 1, 1]

    def test_labels_renumbered_by_first_occurrence(self):
        a = np.zeros((4, 4))
        a[:2, :2] = 1.0
        a[2:, 2:] = 1.0
        labels = spectral_cluster(a, 2, seed=3)
        assert labels[0] == 0

    def test_permutation_gives_same_partition(self):
        emb, truth = gen_embeddings(seed=8, k=3, n_per_cluster=10, dim=16, noise_sigma=0.05)
        rng = np.random.default_rng(0)
        perm = rng.permutation(len(truth))
        permuted = EmbeddingSet(
            emb.recording,
            emb.dim,
            tuple(emb.windows[i] for i in perm),
            emb.vectors[perm],
        )
        labels1, _ = nmesc_cluster(emb, max_speakers=4, seed=1)
        labels2, _ = nmesc_cluster(permuted, max_speakers=4, seed=1)

        def partition(labels):
            groups = {}
            for idx, lab in enumerate(labels):
                groups.setdefault(int(lab), set()).add(idx)
            return {frozenset(g) for g in groups.values()}

        original_sets = partition(labels1)
        permuted_sets = {
            frozenset(int(perm[i]) for i in group) for group in partition(labels2)
        }
        assert original_sets == permuted_sets


class TestLabelsToAnnotation:
    def test_windows_become_segments(self):
        emb = embedding_set([[1, 0], [1, 0], [0, 1]])
        ann = labels_to_annotation(emb, [0, 0, 1])
        assert ann.speakers == ("spk0", "spk1")
        # two adjacent windows with one label merge
        spk0 = [s for s in ann.segments if s.speaker == "spk0"]
        assert len(spk0) == 1 and spk0[0].duration == 2.0
