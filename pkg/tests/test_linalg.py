"""In-repo symmetric eigensolver against the numpy oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatlab import linalg


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (3, 2), (5, 3), (8, 4),
                                    (13, 5), (21, 6), (30, 7)])
def test_matches_numpy_oracle(n, seed):
    a = random_symmetric(n, seed)
    w, v = linalg.symmetric_eigh(a)
    w_ref = np.linalg.eigvalsh(a)
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    assert np.max(np.abs(w - w_ref)) <= 1e-10 * scale
    # residual contract: ||A v - v diag(w)|| <= 1e-9 ||A||
    assert linalg.residual_bound(a, w, v) <= 1e-9 * scale
    # eigenvectors orthonormal
    assert np.max(np.abs(v.T @ v - np.eye(n))) <= 1e-10


def test_ascending_order():
    a = random_symmetric(12, 99)
    w, _ = linalg.symmetric_eigh(a)
    assert np.all(np.diff(w) >= 0)


def test_diagonal_matrix_exact():
    d = np.diag([3.0, -1.0, 2.0])
    w, v = linalg.symmetric_eigh(d)
    assert np.allclose(w, [-1.0, 2.0, 3.0], atol=1e-14)
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]], atol=1e-14)


def test_two_by_two_closed_form():
    # [[1,-1],[-1,3]] has eigenvalues 2 -+ sqrt(2)
    a = np.array([[1.0, -1.0], [-1.0, 3.0]])
    w = linalg.symmetric_eigvals(a)
    assert w[0] == pytest.approx(2 - np.sqrt(2), abs=1e-12)
    assert w[1] == pytest.approx(2 + np.sqrt(2), abs=1e-12)


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        linalg.symmetric_eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_nonsquare():
    with pytest.raises(ValueError):
        linalg.symmetric_eigh(np.zeros((2, 3)))


def test_similarity_preserves_spectrum():
    import heatlab as hl

    g = hl.random_connected_graph(9, 17)
    h = g.generator_matrix()
    s = linalg.similarity_symmetrize(h, g.mu)
    assert np.max(np.abs(s - s.T)) <= 1e-12
    w_s = linalg.symmetric_eigvals(s)
    w_h = np.sort(np.linalg.eigvals(h).real)
    assert np.max(np.abs(w_s - w_h)) <= 1e-9


def test_degenerate_spectrum():
    # complete graph on 5 vertices: eigenvalues {0, 5, 5, 5, 5} of H
    import heatlab as hl

    g = hl.complete_graph(5)
    w = linalg.symmetric_eigvals(g.generator_matrix())
    assert w[0] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(w[1:], 5.0, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=1, max_value=16),
       seed=st.integers(min_value=0, max_value=10_000))
def test_property_eigensolver(n, seed):
    a = random_symmetric(n, seed)
    w, v = linalg.symmetric_eigh(a)
    scale = max(1.0, float(np.max(np.abs(a))) * n)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(a @ v - v * w)) <= 1e-9 * scale
    assert np.max(np.abs(v.T @ v - np.eye(n))) <= 1e-9
