import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn
from hbfsm.numerics import RandomStream, condition_number, pseudo_inverse, standard_complex_gaussian


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_pinv_identity():
    np.testing.assert_allclose(pseudo_inverse(np.eye(3)), np.eye(3), atol=1e-15)


def test_pinv_row_vector_closed_form(rng):
    v = crandn(rng, 1, 5)
    expected = v.conj().T / np.sum(np.abs(v) ** 2)
    np.testing.assert_allclose(pseudo_inverse(v), expected, rtol=1e-12)


def test_pinv_penrose_4x2(rng):
    A = crandn(rng, 4, 2)
    X = pseudo_inverse(A)
    assert _rel(A @ X @ A, A) < 1e-10
    assert _rel(X @ A @ X, X) < 1e-10
    assert _rel((A @ X).conj().T, A @ X) < 1e-10
    assert _rel((X @ A).conj().T, X @ A) < 1e-10


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 16), n=st.integers(1, 16), rank=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_pinv_penrose_property(m, n, rank, seed):
    rng = np.random.default_rng(seed)
    r = min(rank, m, n)
    A = crandn(rng, m, r) @ crandn(rng, r, n)  # possibly rank deficient
    X = pseudo_inverse(A)
    assert X.shape == (n, m)
    assert _rel(A @ X @ A, A) < 1e-9
    assert _rel(X @ A @ X, X) < 1e-9
    assert _rel((A @ X).conj().T, A @ X) < 1e-9
    assert _rel((X @ A).conj().T, X @ A) < 1e-9


def test_pinv_matches_numpy_and_batches(rng):
    A = crandn(rng, 7, 3, 5)
    X = pseudo_inverse(A)
    for k in range(7):
        np.testing.assert_allclose(X[k], np.linalg.pinv(A[k]), atol=1e-12)


def test_pinv_square_inverse(rng):
    A = crandn(rng, 6, 6)
    np.testing.assert_allclose(pseudo_inverse(A) @ A, np.eye(6), atol=1e-9)


def test_pinv_errors():
    with pytest.raises(ValueError):
        pseudo_inverse(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        pseudo_inverse(np.array([[1.0, np.nan]]))


def test_condition_number(rng):
    assert condition_number(np.diag([4.0, 2.0])) == pytest.approx(2.0)
    assert np.isinf(condition_number(np.array([[1.0, 1.0], [1.0, 1.0]]))) or \
        condition_number(np.array([[1.0, 1.0], [1.0, 1.0]])) > 1e15


def test_complex_gaussian_moments():
    x = standard_complex_gaussian(RandomStream(3, (1,)), 10**6)
    assert abs(x.real.mean()) < 5e-3 and abs(x.imag.mean()) < 5e-3
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.01)
    assert np.var(x.real) == pytest.approx(0.5, rel=0.01)


def test_stream_replay_and_independence():
    s = RandomStream(99, (4, 2))
    a = standard_complex_gaussian(s, 1000)
    np.testing.assert_array_equal(a, standard_complex_gaussian(s, 1000))
    x = standard_complex_gaussian(RandomStream(99, (0,)), 10**5)
    y = standard_complex_gaussian(RandomStream(99, (1,)), 10**5)
    rho = np.abs(np.vdot(x, y)) / np.sqrt(np.vdot(x, x).real * np.vdot(y, y).real)
    assert rho < 0.01


def test_stream_order_independence():
    # drawing stream B first does not change stream A
    a1 = RandomStream(5, (1,)).generator().random(10)
    RandomStream(5, (2,)).generator().random(10)
    np.testing.assert_array_equal(a1, RandomStream(5, (1,)).generator().random(10))
    assert RandomStream(5, (1,)).child(3) == RandomStream(5, (1, 3))


def test_stream_validation():
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(1, (-2,))
    with pytest.raises(ValueError):
        standard_complex_gaussian(RandomStream(1), 0)
