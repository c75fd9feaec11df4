import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pdeobs.errors import DegenerateMetricError, InvalidInputError, LinearDependenceError
from pdeobs.linalg import (
    SymMatrix,
    cholesky,
    gen_sym_eig,
    gram_schmidt,
    sym_eig,
    trapezoid_quadrature,
)


def char_poly_roots(m):
    """Eigenvalue oracle for dim <= 3: roots of det(m - x I)."""
    coeffs = np.poly(m)  # characteristic polynomial from numpy's own eigen-free path
    return np.sort(np.roots(coeffs).real)


def test_symmatrix_symmetrized_exactly():
    m = SymMatrix([[1.0, 2.0], [4.0, 3.0]])
    assert m.entries[0, 1] == m.entries[1, 0] == 3.0
    with pytest.raises(InvalidInputError):
        SymMatrix(np.zeros((0, 0)))
    with pytest.raises(InvalidInputError):
        SymMatrix(np.zeros((2, 3)))


def test_sym_eig_identity_and_diagonal():
    np.testing.assert_array_equal(sym_eig(np.eye(3)).eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(sym_eig(np.diag([4.0, 1.0, 9.0])).eigenvalues, [1, 4, 9])


def test_sym_eig_two_by_two():
    res = sym_eig([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(res.eigenvalues, [1.0, 3.0], atol=1e-14)
    r = 1 / np.sqrt(2)
    # largest-magnitude component positive: (1, -1)/sqrt2 keeps its first entry positive
    np.testing.assert_allclose(res.eigenvectors[:, 0], [r, -r], atol=1e-14)
    np.testing.assert_allclose(res.eigenvectors[:, 1], [r, r], atol=1e-14)


def test_sym_eig_rejects_empty():
    with pytest.raises(InvalidInputError):
        sym_eig(np.zeros((0, 0)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-1, 1))))
def test_sym_eig_reconstructs(a):
    m = 0.5 * (a + a.T)
    res = sym_eig(m)
    v, w = res.eigenvectors, res.eigenvalues
    assert np.all(np.diff(w) >= 0)
    recon = v @ np.diag(w) @ v.T
    assert np.linalg.norm(m - recon) <= 1e-10 * max(np.linalg.norm(m), 1e-300) + 1e-300
    np.testing.assert_allclose(np.linalg.norm(v, axis=0), 1.0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-1, 1))))
def test_sym_eig_matches_characteristic_roots(a):
    m = 0.5 * (a + a.T)
    np.testing.assert_allclose(sym_eig(m).eigenvalues, char_poly_roots(m), atol=1e-9)


def test_cholesky_examples():
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(cholesky([[4.0, 2.0], [2.0, 5.0]]), [[2.0, 0.0], [1.0, 2.0]])
    with pytest.raises(DegenerateMetricError) as info:
        cholesky([[1.0, 2.0], [2.0, 1.0]])
    assert info.value.pivot_index == 1


def test_cholesky_reconstruction(rng):
    b = rng.standard_normal((6, 6))
    s = b @ b.T + 0.1 * np.eye(6)
    low = cholesky(s)
    assert np.allclose(np.triu(low, 1), 0)
    assert np.linalg.norm(low @ low.T - s) <= 1e-12 * np.linalg.norm(s)


def test_gen_sym_eig_examples(rng):
    g = rng.standard_normal((4, 4))
    g = g + g.T
    np.testing.assert_allclose(gen_sym_eig(g, np.eye(4)).eigenvalues,
                               sym_eig(g).eigenvalues, atol=1e-12)
    np.testing.assert_allclose(
        gen_sym_eig([[2.0, 0.0], [0.0, 8.0]], [[1.0, 0.0], [0.0, 4.0]]).eigenvalues, [2.0, 2.0])
    assert gen_sym_eig([[0.0, 0.0], [0.0, 1.0]], np.eye(2)).eigenvalues[0] == 0.0


def test_gen_sym_eig_metric_normalization(rng):
    b = rng.standard_normal((5, 5))
    s = b @ b.T + np.eye(5)
    g = rng.standard_normal((5, 5))
    g = g @ g.T
    res = gen_sym_eig(g, s)
    x = res.eigenvectors
    np.testing.assert_allclose(x.T @ s @ x, np.eye(5), atol=1e-10)
    np.testing.assert_allclose(g @ x, s @ x @ np.diag(res.eigenvalues), atol=1e-9)


def test_gen_sym_eig_degenerate_metric():
    with pytest.raises(DegenerateMetricError):
        gen_sym_eig(np.eye(2), [[1.0, 1.0], [1.0, 1.0]])


def test_gen_sym_eig_congruence_invariance(rng):
    for _ in range(20):
        g = rng.standard_normal((4, 4))
        g = g @ g.T
        b = rng.standard_normal((4, 4))
        s = b @ b.T + np.eye(4)
        m = rng.standard_normal((4, 4)) + 3 * np.eye(4)
        w1 = gen_sym_eig(g, s).eigenvalues
        w2 = gen_sym_eig(m.T @ g @ m, m.T @ s @ m).eigenvalues
        np.testing.assert_allclose(w2, w1, rtol=1e-10, atol=1e-12 * w1[-1])


def test_gram_schmidt_examples():
    out = gram_schmidt([np.array([1.0, 0.0]), np.array([1.0, 1.0])])
    np.testing.assert_allclose(out, [[1, 0], [0, 1]], atol=1e-15)
    q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((4, 4)))
    cols = [c for c in q.T]
    out = gram_schmidt(cols)
    for c, o in zip(cols, out):
        assert np.allclose(o, c, atol=1e-14) or np.allclose(o, -c, atol=1e-14)


def test_gram_schmidt_dependence():
    with pytest.raises(LinearDependenceError) as info:
        gram_schmidt([np.array([1.0, 2.0]), np.array([2.0, 4.0])])
    assert info.value.index == 1


def test_gram_schmidt_span_and_weighted_inner(rng):
    w = np.diag(rng.uniform(0.5, 2.0, 6))
    vecs = [rng.standard_normal(6) for _ in range(4)]
    out = gram_schmidt(vecs, lambda u, v: u @ w @ v)
    gram = np.array([[u @ w @ v for v in out] for u in out])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
    q = np.array(out).T
    for v in vecs:
        coef = np.linalg.lstsq(q, v, rcond=None)[0]
        assert np.linalg.norm(q @ coef - v) <= 1e-9 * np.linalg.norm(v)


def test_trapezoid_examples():
    assert trapezoid_quadrature(np.ones(7), 1 / 6) == pytest.approx(1.0, abs=1e-15)
    t = np.linspace(0, 1, 11)
    assert trapezoid_quadrature(t, 0.1) == pytest.approx(0.5, abs=1e-15)
    # f = exp(-t/2) on [0, 10], 2001 samples: the error is the Euler-Maclaurin
    # leading term h^2/12 (f'(10) - f'(0)) = 1.0347e-6 (slightly above 1e-6)
    t = np.linspace(0, 10, 2001)
    h = 10 / 2000
    err = trapezoid_quadrature(np.exp(-t / 2), h) - 2 * (1 - np.exp(-5))
    leading = h**2 / 12 * (0.5 - 0.5 * np.exp(-5))
    assert err == pytest.approx(leading, rel=1e-4)
    assert abs(err) < 1.1e-6
    with pytest.raises(InvalidInputError):
        trapezoid_quadrature([1.0], 0.1)
