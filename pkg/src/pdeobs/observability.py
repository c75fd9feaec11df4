"""Unobservability index from output responses.

A *model* here is any object with

``state_dim``
    dimension of the discretized state;
``is_linear``
    whether the output map u(0) -> y is linear and homogeneous;
``time_weights``
    quadrature weights of the output samples, shape ``(n_times,)``;
``responses(u0s)``
    outputs for a batch of initial states ``(m, state_dim)``, returned with
    shape ``(m, n_times, n_sensors)``.

The output inner product is ``<y, z>_Y = sum_k w_k sum_i y_i(t_k) z_i(t_k)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AssemblyError,
    BlowUpError,
    InvalidInputError,
    SearchFailureError,
)
from .linalg import SymMatrix, as_sym, cholesky, gen_sym_eig

log = logging.getLogger(__name__)

PSD_CLAMP_TOL = 1e-10
UNOBSERVABLE_TOL = 1e-14


@dataclass(frozen=True)
class EstimationBasis:
    """Basis vectors of the estimation subspace and their Gram matrix."""

    vectors: np.ndarray  # (s, state_dim)
    s_matrix: SymMatrix
    labels: tuple = ()
    coeff_map: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.s_matrix.dim:
            raise InvalidInputError("basis vectors and Gram matrix disagree in size")

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def combine(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.vectors


def unit_basis(dim: int, s: int, labels: Sequence[str] = ()) -> EstimationBasis:
    """First ``s`` coordinate directions of R^dim with Euclidean metric."""
    if not 1 <= s <= dim:
        raise InvalidInputError(f"need 1 <= s <= {dim}, got s = {s}")
    labels = tuple(labels) or tuple(f"e{i + 1}" for i in range(s))
    return EstimationBasis(np.eye(dim)[:s], SymMatrix(np.eye(s)), labels)


@dataclass(frozen=True)
class OutputSeries:
    """Sensor readings ``values[k, ..., i]`` at ``times[k]`` with quadrature weights."""

    times: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def norm(self) -> float:
        v = self.values.reshape(self.times.size, -1)
        return float(np.sqrt(np.einsum("kp,kp,k->", v, v, self.weights)))


@dataclass(frozen=True)
class GramianPair:
    g: SymMatrix
    s: SymMatrix
    rho: float = 1.0
    basis_labels: tuple = ()

    def __post_init__(self):
        if self.g.dim != self.s.dim:
            raise InvalidInputError("g and s must have the same dimension")
        cholesky(self.s)


@dataclass(frozen=True)
class IndexResult:
    sigma_min: float
    epsilon: float
    index: float  # rho / epsilon; inf when the subspace is practically unobservable
    rho: float
    worst_coeffs: np.ndarray
    worst_direction: Optional[np.ndarray]
    method: str
    warnings: tuple = field(default=())


def y_inner(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    return float(np.einsum("kp,kp,k->", a, b, weights))


def output_gram(responses: np.ndarray, weights: np.ndarray) -> SymMatrix:
    """Matrix of Y inner products between response series ``responses[i]``."""
    return SymMatrix(np.einsum("ikp,jkp,k->ij", responses, responses, weights))


def linear_gramian(model, basis: EstimationBasis) -> GramianPair:
    """Gramian of the homogeneous responses to each basis direction."""
    if not model.is_linear:
        raise InvalidInputError("linear_gramian needs a linear model; use empirical_gramian")
    resp = model.responses(basis.vectors)
    return GramianPair(output_gram(resp, model.time_weights), basis.s_matrix, 1.0, basis.labels)


def empirical_gramian(model, nominal_u0, basis: EstimationBasis, rho: float = 0.1) -> GramianPair:
    """Gramian from central differences of trajectories started at u0 +/- rho e_i."""
    if not rho > 0:
        raise InvalidInputError(f"perturbation radius must be positive, got {rho}")
    u0 = np.asarray(nominal_u0, dtype=float)
    if u0.shape != (model.state_dim,):
        raise InvalidInputError(f"nominal state must have shape ({model.state_dim},)")
    diffs = []
    for i, e in enumerate(basis.vectors):
        try:
            pair = model.responses(np.stack([u0 + rho * e, u0 - rho * e]))
        except BlowUpError as exc:
            raise BlowUpError(exc.time, index=i) from exc
        diffs.append((pair[0] - pair[1]) / (2.0 * rho))
    g = output_gram(np.array(diffs), model.time_weights)
    return GramianPair(g, basis.s_matrix, rho, basis.labels)


def unobservability_index(p: GramianPair, basis: Optional[EstimationBasis] = None,
                          method: str = "gramian") -> IndexResult:
    """rho/epsilon = 1/sqrt(sigma_min) of the pencil (G, S).

    ``epsilon`` is ``sqrt(sigma_min) * rho``. A sigma_min below
    ``1e-14 * sigma_max`` yields ``index = inf`` with a diagnostic instead of
    an exception.
    """
    eig = gen_sym_eig(p.g, p.s)
    sigma = float(eig.eigenvalues[0])
    sigma_max = float(eig.eigenvalues[-1])
    warnings = []
    if sigma < 0:
        if sigma >= -PSD_CLAMP_TOL * max(sigma_max, 0.0):
            warnings.append(f"clamped negative eigenvalue {sigma:.3e} to 0")
            log.warning(warnings[-1])
            sigma = 0.0
        else:
            raise AssemblyError(
                f"gramian is not positive semidefinite: eigenvalue {sigma:.3e}"
                f" (largest {sigma_max:.3e})"
            )
    if sigma_max <= 0 or sigma <= UNOBSERVABLE_TOL * sigma_max:
        warnings.append(
            f"sigma_min = {sigma:.3e} is negligible against sigma_max = {sigma_max:.3e};"
            " the estimation subspace is practically unobservable"
        )
        log.warning(warnings[-1])
        index = float("inf")
    else:
        index = 1.0 / np.sqrt(sigma)
    xi = eig.eigenvectors[:, 0]
    direction = None if basis is None else basis.combine(xi)
    return IndexResult(
        sigma_min=sigma,
        epsilon=float(np.sqrt(sigma) * p.rho),
        index=float(index),
        rho=p.rho,
        worst_coeffs=xi,
        worst_direction=direction,
        method=method,
        warnings=tuple(warnings),
    )


def _nelder_mead(f, x0, step, max_iters, tol):
    """Plain Nelder-Mead; stops when the simplex diameter drops below ``tol``."""
    n = x0.size
    simplex = np.vstack([x0] + [x0 + step * np.eye(n)[i] for i in range(n)])
    values = np.array([f(x) for x in simplex])
    for it in range(max_iters):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) < tol:
            return simplex[0], values[0], True, it
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                values[1:] = [f(x) for x in simplex[1:]]
    order = np.argsort(values, kind="stable")
    simplex, values = simplex[order], values[order]
    done = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) < tol
    return simplex[0], values[0], bool(done), max_iters


def direct_index_search(
    model,
    nominal_u0,
    basis: EstimationBasis,
    rho: float = 0.1,
    n_restarts: int = 8,
    max_iters: int = 200,
    seed: int = 0,
    tol: float = 1e-8,
) -> IndexResult:
    """Minimize the output discrepancy over the rho-sphere around ``nominal_u0``.

    Perturbations are ``rho * sum_i a_i e_i`` with ``a.T S a = 1``. The search
    runs Nelder-Mead in tangent-plane coordinates of the sphere, each trial
    point being rescaled back onto the sphere before it is simulated. Starts
    are +/- each basis direction, then random sphere points from ``seed``.
    The result is an upper bound on epsilon (the best minimum found).
    """
    if not rho > 0:
        raise InvalidInputError(f"perturbation radius must be positive, got {rho}")
    s = basis.size
    if s > 10:
        raise InvalidInputError("direct search supports at most 10 basis directions")
    if n_restarts < 1:
        raise InvalidInputError("need at least one restart")
    u0 = np.asarray(nominal_u0, dtype=float)
    weights = model.time_weights
    y0 = model.responses(u0[None, :])[0]
    low = cholesky(basis.s_matrix)

    def coeffs_of(b):
        # whitened coordinates b (Euclidean unit sphere) -> basis coefficients
        b = b / np.linalg.norm(b)
        return np.linalg.solve(low.T, b)

    def discrepancy(b):
        a = coeffs_of(b)
        r = model.responses((u0 + rho * basis.combine(a))[None, :])[0]
        d = r - y0
        return np.sqrt(max(y_inner(d, d, weights), 0.0))

    starts = []
    for i in range(s):
        starts += [low.T[:, i].copy(), -low.T[:, i]]
    rng = np.random.default_rng(seed)
    while len(starts) < n_restarts:
        starts.append(rng.standard_normal(s))
    starts = [b / np.linalg.norm(b) for b in starts[:n_restarts]]

    best = None  # (value, b, converged)
    for b0 in starts:
        if s == 1:
            val, b, ok = discrepancy(b0), b0, True
        else:
            q, _ = np.linalg.qr(np.column_stack([b0, np.eye(s)]))
            tangent = q[:, 1:s]
            if q[:, 0] @ b0 < 0:
                tangent = -tangent

            def chart(w, b0=b0, tangent=tangent):
                return b0 + tangent @ w

            w, val, ok, _ = _nelder_mead(
                lambda w: discrepancy(chart(w)), np.zeros(s - 1), 0.25, max_iters, tol
            )
            b = chart(w)
        if best is None or (ok and not best[2]) or (ok == best[2] and val < best[0]):
            best = (val, b / np.linalg.norm(b), ok)

    eps, b, ok = best
    a = coeffs_of(b)
    result = IndexResult(
        sigma_min=float((eps / rho) ** 2),
        epsilon=float(eps),
        index=float(rho / eps) if eps > 0 else float("inf"),
        rho=rho,
        worst_coeffs=a,
        worst_direction=basis.combine(a),
        method="direct-search",
    )
    if not ok:
        raise SearchFailureError("no restart of the direct search converged", best=result)
    return result
