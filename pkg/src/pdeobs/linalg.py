"""Small dense symmetric linear algebra and quadrature.

Everything here works on tiny matrices (a handful of basis directions, at most
a few hundred grid points), so the routines favour robustness and
reproducible output over speed: eigenpairs come from cyclic Jacobi sweeps and
every eigenvector or orthonormalized vector is given a deterministic sign.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateMetricError, InvalidInputError, LinearDependenceError

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
CHOLESKY_PIVOT_TOL = 1e-14
DEPENDENCE_TOL = 1e-10


class SymMatrix:
    """Real symmetric matrix; symmetry is enforced by averaging with the transpose."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidInputError("matrix dimension must be at least 1")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._entries = a

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._entries if dtype is None else self._entries.astype(dtype)

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


@dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, unit norm in the metric of the problem


def as_sym(m) -> SymMatrix:
    return m if isinstance(m, SymMatrix) else SymMatrix(m)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its first largest-magnitude component is positive."""
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def _fix_column_signs(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        out[:, j] = _fix_sign(out[:, j])
    return out


def sym_eig(m) -> EigResult:
    """All eigenpairs of a symmetric matrix by cyclic Jacobi rotations."""
    if isinstance(m, SymMatrix):
        a = m.entries.copy()
    else:
        a = np.array(m, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
        a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = 100.0 * abs(apq)
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    # below rounding of both diagonal entries: rotating would overflow tau
                    a[p, q] = a[q, p] = 0.0
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigResult(w[order], _fix_column_signs(v[:, order]))


def cholesky(s) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == s``."""
    a = as_sym(s).entries
    n = a.shape[0]
    tol = CHOLESKY_PIVOT_TOL * max(float(np.max(np.diag(a))), 0.0)
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if d <= tol:
            raise DegenerateMetricError(j, d)
        low[j, j] = np.sqrt(d)
        low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def gen_sym_eig(g, s) -> EigResult:
    """Eigenpairs of the pencil ``g x = sigma s x`` with ``x.T @ s @ x = 1``.

    ``s`` is whitened by its Cholesky factor and the resulting standard
    problem is handed to :func:`sym_eig`.
    """
    g = as_sym(g)
    s = as_sym(s)
    if g.dim != s.dim:
        raise InvalidInputError(f"dimension mismatch: g is {g.dim}, s is {s.dim}")
    low = cholesky(s)
    half = solve_triangular(low, g.entries, lower=True)
    whitened = solve_triangular(low, half.T, lower=True)
    res = sym_eig(SymMatrix(whitened))
    vecs = solve_triangular(low.T, res.eigenvectors, lower=False)
    return EigResult(res.eigenvalues, _fix_column_signs(vecs))


def gram_schmidt(
    vectors: Sequence[np.ndarray],
    inner: Callable[[np.ndarray, np.ndarray], float] = np.dot,
) -> list[np.ndarray]:
    """Orthonormalize ``vectors`` in order under ``inner``.

    Each vector is projected twice against the already accepted ones, which
    keeps the result orthonormal to roundoff even for nearly dependent input.
    """
    basis: list[np.ndarray] = []
    for i, vec in enumerate(vectors):
        w = np.array(vec, dtype=float)
        norm0 = np.sqrt(max(inner(w, w), 0.0))
        if norm0 == 0.0:
            raise LinearDependenceError(i, 0.0)
        for _ in range(2):
            for e in basis:
                w = w - inner(w, e) * e
        norm = np.sqrt(max(inner(w, w), 0.0))
        if norm < DEPENDENCE_TOL * norm0:
            raise LinearDependenceError(i, norm / norm0)
        basis.append(_fix_sign(w / norm))
    return basis


def trapezoid_quadrature(samples, dt: float) -> float:
    """Composite trapezoid rule on uniformly spaced samples."""
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise InvalidInputError("trapezoid rule needs at least two samples")
    if not dt > 0:
        raise InvalidInputError(f"sample spacing must be positive, got {dt}")
    return float(dt * (np.sum(f) - 0.5 * (f[0] + f[-1])))
