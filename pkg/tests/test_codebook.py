import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn
from hbfsm.channel import PathSet, channel_matrix, draw_paths, steering_vector
from hbfsm.codebook import (MAX_CODEBOOK_BITS, Codebook, build_array_response_codebook,
                            build_beamsteering_codebook, chordal_distance_sq,
                            quantization_error_study, select_beamformer)
from hbfsm.numerics import RandomStream


def test_array_response_codebook():
    p = PathSet(np.array([1 + 0j]), np.array([0.0]), np.array([0.3]))
    cb = build_array_response_codebook(p, 8)
    assert cb.size == 1
    np.testing.assert_allclose(cb.vectors[0], np.ones(8) / np.sqrt(8))
    p3 = draw_paths(np.random.default_rng(0), (), 3)
    cb3 = build_array_response_codebook(p3, 8)
    assert cb3.size == 3
    np.testing.assert_allclose(cb3.angles, p3.aod)
    np.testing.assert_allclose(np.linalg.norm(cb3.vectors, axis=-1), 1.0)


def test_beamsteering_codebook():
    cb = build_beamsteering_codebook(1, 2)
    np.testing.assert_allclose(cb.angles, [0.0, np.pi])
    assert cb.size == 2
    cb6 = build_beamsteering_codebook(6, 8)
    assert cb6.size == 64
    np.testing.assert_allclose(np.linalg.norm(cb6.vectors, axis=-1), 1.0, atol=1e-12)
    # raw grid: 64 pairwise-distinct codewords (exhaustive chordal check)
    raw = build_beamsteering_codebook(6, 8, "raw")
    dr = chordal_distance_sq(raw.vectors[:, None, :], raw.vectors[None, :, :])
    assert np.all(dr[~np.eye(64, dtype=bool)] > 1e-9)
    # sin grid: n and N/2 - n share sin(2 pi n / N), and sin = +1, -1 give the same
    # e^{+-j pi k}: 30 pairs + {0, 32} + {16, 48} -> 32 directions
    d = chordal_distance_sq(cb6.vectors[:, None, :], cb6.vectors[None, :, :])
    distinct = {min(np.flatnonzero(row < 1e-9)) for row in d}
    assert len(distinct) == 32
    np.testing.assert_allclose(cb6.vectors[5], steering_vector(2 * np.pi * 5 / 64, 8))


def test_beamsteering_limits():
    with pytest.raises(MemoryError):
        build_beamsteering_codebook(MAX_CODEBOOK_BITS + 1, 8)
    with pytest.raises(ValueError):
        build_beamsteering_codebook(0, 8)
    with pytest.raises(ValueError):
        build_beamsteering_codebook(3, 8, "bogus")


def test_select_single_path_gain(rng):
    p = draw_paths(rng, (), 1)
    H = channel_matrix(p, 8, 2)
    idx, f, gain = select_beamformer(H, build_array_response_codebook(p, 8))
    np.testing.assert_allclose(f, steering_vector(p.aod[0], 8))
    assert gain == pytest.approx(8 * 2 * abs(p.gains[0]) ** 2, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_r=st.integers(1, 4), bits=st.integers(1, 7))
def test_select_matches_brute_force(seed, n_r, bits):
    rng = np.random.default_rng(seed)
    H = crandn(rng, n_r, 8)
    cb = build_beamsteering_codebook(bits, 8)
    gains = [np.linalg.norm(H @ v) ** 2 for v in cb.vectors]
    best = max(gains)
    first = next(n for n, g in enumerate(gains) if g >= best * (1 - 1e-12))
    idx, f, gain = select_beamformer(H, cb)
    assert gain == pytest.approx(best, rel=1e-12)
    assert idx == first or gains[idx] == pytest.approx(best, rel=1e-12)


def test_select_tie_lowest_index_and_permutation(rng):
    v = steering_vector(0.4, 4)
    cb = Codebook("custom", np.stack([v, v, steering_vector(1.0, 4)]), np.zeros(3))
    H = v.conj()[None, :]
    assert select_beamformer(H, cb)[0] == 0
    H = crandn(rng, 2, 8)
    cb = build_beamsteering_codebook(5, 8)
    perm = rng.permutation(cb.size)
    shuffled = Codebook("beamsteering", cb.vectors[perm], cb.angles[perm])
    assert select_beamformer(H, shuffled)[2] == pytest.approx(select_beamformer(H, cb)[2])


def test_select_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        select_beamformer(crandn(rng, 1, 4), build_beamsteering_codebook(3, 8))


def test_fb_gain_below_fa_and_gap_shrinks():
    p = draw_paths(np.random.default_rng(2), (2000,), 1)
    H = channel_matrix(p, 8, 1)
    g_a = select_beamformer(H, build_array_response_codebook(p, 8))[2]
    gaps = []
    for b in (4, 8, 12):
        g_b = select_beamformer(H, build_beamsteering_codebook(b, 8))[2]
        assert np.all(g_b <= g_a * (1 + 1e-12))
        gaps.append(np.mean(g_a - g_b))
    assert gaps[0] > gaps[1] > gaps[2]


def test_chordal_distance_examples(rng):
    f = steering_vector(0.7, 6)
    assert chordal_distance_sq(f, f) == pytest.approx(0.0, abs=1e-15)
    assert chordal_distance_sq(np.array([1, 0]), np.array([0, 1])) == 1.0
    assert chordal_distance_sq(f, np.exp(1j * 2.1) * f) == pytest.approx(0.0, abs=1e-15)
    g = crandn(rng, 6)
    g /= np.linalg.norm(g)
    d = chordal_distance_sq(f, g)
    assert 0 <= d <= 1 and d == pytest.approx(chordal_distance_sq(g, f))
    # projector form 1 - tr(f f^H g g^H)
    proj = 1 - np.trace(np.outer(f, f.conj()) @ np.outer(g, g.conj())).real
    assert d == pytest.approx(proj)
    with pytest.raises(ValueError):
        chordal_distance_sq(2 * f, g)


def test_quantization_study_shape():
    rep = quantization_error_study(8, 1, [4, 6, 8, 10], 1000, RandomStream(8))
    assert rep.mean_dc2[0] > rep.mean_dc2[1] > rep.mean_dc2[2] > rep.mean_dc2[3]
    assert all(0 <= m <= 1 for m in rep.max_dc2)
    assert np.all(rep.bound(rep.bits) >= np.array(rep.max_dc2) * (1 - 1e-12))
    assert [r["B"] for r in rep.rows()] == [4, 6, 8, 10]


def test_quantization_b20_below_b4():
    rep = quantization_error_study(8, 1, [4, 20], 100, RandomStream(8))
    assert rep.max_dc2[1] < rep.max_dc2[0]


def test_quantization_planted_match():
    # an AoD exactly on the sin-grid gives zero distance
    from hbfsm.codebook import build_beamsteering_codebook
    cb = build_beamsteering_codebook(4, 8)
    p = PathSet(np.array([1 + 0j]), np.array([cb.angles[3]]), np.array([0.0]))
    H = channel_matrix(p, 8, 1)
    f_a = select_beamformer(H, build_array_response_codebook(p, 8))[1]
    f_b = select_beamformer(H, cb)[1]
    assert chordal_distance_sq(f_a, f_b) == pytest.approx(0.0, abs=1e-12)
