import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import spearmanr
from sklearn.base import clone

from ffgames.gamescape import (PCAEmbedding, SVDEmbedding, SchurEmbedding, SynthSpec, Embedding,
                               convex_hull_2d, disc_reconstruct, embed, hull_area_2d,
                               is_redundant, numerical_rank, pca_embedding, redundancy_gap,
                               schur_embedding, svd_embedding, synth_payoff)
from ffgames.games import long_cycle_matrix
from helpers import UNIT_RPS, random_antisymmetric

# RPS with a second copy of scissors (agents R, P, S, S').
DUP_SCISSORS = np.array([[0.0, 1.0, -1.0, -1.0],
                         [-1.0, 0.0, 1.0, 1.0],
                         [1.0, -1.0, 0.0, 0.0],
                         [1.0, -1.0, 0.0, 0.0]])


def test_rank_of_small_cases():
    assert numerical_rank(UNIT_RPS) == 2
    assert numerical_rank(np.zeros((4, 4))) == 0
    assert numerical_rank(DUP_SCISSORS) == 2
    assert numerical_rank(long_cycle_matrix(6)) == 4


def test_rps_points_reproduce_matrix():
    emb = schur_embedding(UNIT_RPS, 2)
    assert np.abs(disc_reconstruct(emb.coords) - UNIT_RPS).max() < 1e-8
    assert emb.recon_error < 1e-8


def test_rps_hull_area_from_cross_products():
    # With points x_i whose pairwise cross products are A_ij, the triangle
    # area is (A_01 + A_12 + A_20) / 2 = 3/2.
    assert schur_embedding(UNIT_RPS).hull_area() == pytest.approx(1.5, abs=1e-12)


def test_duplicated_scissors_has_same_gamescape():
    a = schur_embedding(UNIT_RPS).hull_area()
    b = schur_embedding(DUP_SCISSORS).hull_area()
    assert abs(a - b) <= 1e-9
    c = schur_embedding(DUP_SCISSORS).coords
    assert np.abs(c[2] - c[3]).max() < 1e-12


def test_zero_matrix_embeds_at_origin():
    emb = schur_embedding(np.zeros((3, 3)))
    assert np.array_equal(emb.coords, np.zeros((3, 2)))
    assert emb.hull_area() == 0.0


@given(st.integers(2, 40), st.integers(0, 10_000))
def test_full_rank_reconstruction(n, seed):
    A = random_antisymmetric(np.random.default_rng(seed), n)
    d = numerical_rank(A)
    emb = schur_embedding(A, d)
    assert np.linalg.norm(A - disc_reconstruct(emb.coords)) <= 1e-8


def test_truncation_error_is_tail_of_spectrum():
    A = random_antisymmetric(np.random.default_rng(5), 8)
    s = np.linalg.svd(A, compute_uv=False)
    # Singular values pair up; keeping one block drops all but the top pair.
    emb = schur_embedding(A, 2)
    assert emb.recon_error == pytest.approx(np.sqrt((s[2:] ** 2).sum()), rel=1e-10)


def test_schur_dimension_errors():
    with pytest.raises(ValueError):
        schur_embedding(UNIT_RPS, 1)
    with pytest.raises(ValueError):
        schur_embedding(UNIT_RPS, 4)


def test_pca_and_svd_against_numpy():
    A = random_antisymmetric(np.random.default_rng(2), 6)
    Xc = A - A.mean(axis=0)
    s = np.linalg.svd(Xc, compute_uv=False)
    pca = pca_embedding(A, 2)
    assert np.linalg.norm(pca.coords) ** 2 == pytest.approx((s[:2] ** 2).sum(), rel=1e-10)
    assert pca.recon_error == pytest.approx(np.sqrt((s[2:] ** 2).sum()), rel=1e-8)
    s = np.linalg.svd(A, compute_uv=False)
    svd = svd_embedding(A, 3)
    assert np.linalg.norm(svd.coords) ** 2 == pytest.approx((s[:3] ** 2).sum(), rel=1e-10)
    with pytest.raises(ValueError):
        embed(A, "tsne")
    with pytest.raises(ValueError):
        pca_embedding(A, 0)


def test_hull_of_square_with_interior_and_collinear_points():
    pts = [[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.5, 0.0]]
    assert hull_area_2d(pts) == 1.0
    assert len(convex_hull_2d(pts)) == 4
    assert hull_area_2d([[0, 0], [1, 1], [2, 2]]) == 0.0


@given(st.integers(3, 30), st.integers(0, 10_000))
def test_hull_area_matches_scipy(n, seed):
    from scipy.spatial import ConvexHull

    pts = np.random.default_rng(seed).normal(size=(n, 2))
    assert hull_area_2d(pts) == pytest.approx(ConvexHull(pts).volume, rel=1e-12)


def test_redundancy():
    assert is_redundant(DUP_SCISSORS, 3)
    assert not is_redundant(UNIT_RPS, 0)
    # Mixing rows 1 and 2 with weights (a, 1 - a) leaves row 0 at sup distance
    # max(|2a - 1|, 2 - a, 1 + a), smallest at a = 1/2.
    assert redundancy_gap(UNIT_RPS, 0) == pytest.approx(1.5, abs=1e-9)
    mid = np.array([[0.0, 1.0, 0.5], [-1.0, 0.0, -0.5], [-0.5, 0.5, 0.0]])
    assert is_redundant(mid, 2, 1e-12)


def test_synth_is_deterministic_and_antisymmetric():
    for kind in ("random", "almost_transitive", "almost_cyclic", "mixed", "almost_monotonic"):
        a = synth_payoff(SynthSpec(kind, 12, 0.05, 3)).entries
        b = synth_payoff(SynthSpec(kind, 12, 0.05, 3)).entries
        assert np.array_equal(a, b)
        assert np.array_equal(a, -a.T)
    assert not np.array_equal(synth_payoff(SynthSpec("random", 5, 1.0, 0)).entries,
                              synth_payoff(SynthSpec("random", 5, 1.0, 1)).entries)
    with pytest.raises(ValueError):
        SynthSpec("weird", 4)


def test_almost_transitive_recovers_order():
    A = synth_payoff(SynthSpec("almost_transitive", 40, 0.02, 0)).entries
    rho = spearmanr(A.mean(axis=1), np.arange(40)).statistic
    assert rho > 0.95


def test_almost_cyclic_is_nearly_divergence_free():
    A = synth_payoff(SynthSpec("almost_cyclic", 30, 0.0, 1)).entries
    assert np.abs(A.sum(axis=1)).max() < 1e-10
    assert numerical_rank(A, 1e-8) == 2


def test_schur_transformer():
    A = random_antisymmetric(np.random.default_rng(4), 7)
    est = SchurEmbedding(n_components=2)
    coords = est.fit_transform(A)
    assert np.array_equal(coords, schur_embedding(A, 2).coords)
    assert np.abs(est.transform(A) - coords).max() < 1e-10
    assert clone(est).get_params() == {"n_components": 2}
    with pytest.raises(ValueError):
        est.transform(np.zeros((1, 3)))


def test_transform_of_full_rank_fit_reproduces_payoffs():
    # Payoff rows of a new agent map to a point whose disc payoffs match them.
    A = random_antisymmetric(np.random.default_rng(8), 6)
    est = SchurEmbedding(n_components=6).fit(A[:, :])
    new = est.transform(A[2])
    assert np.abs(disc_reconstruct(np.vstack([new, est.embedding_.coords]))[0, 1:] - A[2]).max() < 1e-8


@pytest.mark.parametrize("cls,fn", [(PCAEmbedding, pca_embedding), (SVDEmbedding, svd_embedding)])
def test_linear_transformers(cls, fn):
    A = random_antisymmetric(np.random.default_rng(6), 6)
    est = cls(n_components=3)
    coords = est.fit_transform(A)
    assert np.array_equal(coords, fn(A, 3).coords)
    assert np.abs(est.transform(A) - coords).max() < 1e-10


def test_embedding_save_load(tmp_path):
    emb = schur_embedding(random_antisymmetric(np.random.default_rng(9), 5), 4)
    path = str(tmp_path / "emb.csv")
    emb.save(path)
    back = Embedding.load(path)
    assert np.array_equal(back.coords, emb.coords) and back.method == "schur"
    assert back.recon_error == emb.recon_error
