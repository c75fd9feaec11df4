"""Heat equation on [0, L] with Dirichlet ends and one point sensor.

The state is the vector of the first ``n`` sine coefficients; each mode
decays independently at rate (k pi / L)^2 and the sensor at ``x0`` reads
``sum_k u_k sin(k pi x0 / L)``. Outputs are compared in L^2(0, T), evaluated
with composite Gauss-Legendre quadrature.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .consistency import Problem, StudyRecord, StudySeries
from .errors import InvalidInputError
from .linalg import SymMatrix, gen_sym_eig, trapezoid_quadrature
from .observability import unit_basis
from .ode import LinearSystem, modal_solve

PROJECTION_POINTS = 4096


@dataclass(frozen=True)
class HeatModel:
    L: float = 2 * np.pi
    T: float = 10.0
    x0: float = 0.5
    n: int = 8
    quad_panels: int = 32
    quad_order: int = 16

    is_linear = True

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("need at least one mode")
        if not self.T > 0 or not self.L > 0:
            raise InvalidInputError("L and T must be positive")
        if not 0 <= self.x0 <= self.L:
            raise InvalidInputError(f"sensor x0 = {self.x0} lies outside [0, {self.L}]")

    @property
    def state_dim(self) -> int:
        return self.n

    @cached_property
    def _quadrature(self):
        nodes, weights = np.polynomial.legendre.leggauss(self.quad_order)
        edges = np.linspace(0.0, self.T, self.quad_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * nodes).ravel()
        w = (half[:, None] * weights).ravel()
        return t, w

    @property
    def time_grid(self) -> np.ndarray:
        return self._quadrature[0]

    @property
    def time_weights(self) -> np.ndarray:
        return self._quadrature[1]

    def linear_system(self) -> LinearSystem:
        rates, _ = assemble(self)
        return LinearSystem(-rates, np.eye(self.n))

    def responses(self, u0s) -> np.ndarray:
        u0s = np.atleast_2d(np.asarray(u0s, dtype=float))
        sys = self.linear_system()
        _, c = assemble(self)
        out = [modal_solve(sys, u0, self.time_grid).states @ c for u0 in u0s]
        return np.array(out)[:, :, None]


def assemble(m: HeatModel):
    """Decay rates (k pi/L)^2 and sensor row sin(k pi x0/L), k = 1..n."""
    k = np.arange(1, m.n + 1)
    return (k * np.pi / m.L) ** 2, np.sin(k * np.pi * m.x0 / m.L)


def gramian_closed_form(m: HeatModel) -> SymMatrix:
    rates, c = assemble(m)
    total = rates[:, None] + rates[None, :]
    return SymMatrix(np.outer(c, c) * -np.expm1(-total * m.T) / total)


def gramian_quadrature(m: HeatModel, nt: int) -> SymMatrix:
    """Same gramian with the time integral done by the trapezoid rule on ``nt`` samples."""
    if nt < 2:
        raise InvalidInputError("need at least two time samples")
    _, c = assemble(m)
    times = np.linspace(0.0, m.T, nt)
    traj = modal_solve(m.linear_system(), c, times)
    # traj.states[:, k] = c_k exp(-rate_k t): the sensor response of mode k
    y = traj.states
    dt = m.T / (nt - 1)
    g = np.empty((m.n, m.n))
    for i in range(m.n):
        for j in range(i, m.n):
            g[i, j] = g[j, i] = trapezoid_quadrature(y[:, i] * y[:, j], dt)
    return SymMatrix(g)


def sigma_min_series(template: HeatModel, n_values: Sequence[int]) -> StudySeries:
    """Smallest gramian eigenvalue for each mode count in ``n_values``."""
    n_values = list(n_values)
    if not n_values:
        raise InvalidInputError("n_values is empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidInputError("n_values must be strictly ascending")
    records = []
    for n in n_values:
        start = time.perf_counter()
        g = gramian_closed_form(replace(template, n=n))
        sigma = float(gen_sym_eig(g, np.eye(n)).eigenvalues[0])
        index = 1.0 / np.sqrt(sigma) if sigma > 0 else float("inf")
        records.append(StudyRecord(n, sigma, None, index, time.perf_counter() - start, "closed-form"))
    meta = {"model": "heat", "L": template.L, "T": template.T, "x0": template.x0}
    return StudySeries(records, meta)


def worst_estimation_error(sensor_error: float, sigma_min: float) -> float:
    """Largest initial-state error compatible with a sensor error bound."""
    return sensor_error / np.sqrt(sigma_min)


def heat_project(m: HeatModel, v: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """First ``n`` sine coefficients (2/L) int_0^L v(x) sin(k pi x/L) dx."""
    x = np.linspace(0.0, m.L, PROJECTION_POINTS)
    dx = m.L / (PROJECTION_POINTS - 1)
    fx = np.asarray(v(x), dtype=float) * np.ones_like(x)
    k = np.arange(1, m.n + 1)
    return np.array(
        [2.0 / m.L * trapezoid_quadrature(fx * np.sin(kk * np.pi * x / m.L), dx) for kk in k]
    )


def heat_lift(m: HeatModel, u) -> Callable[[np.ndarray], np.ndarray]:
    """Sine synthesis sum_k u_k sin(k pi x/L)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (m.n,):
        raise InvalidInputError(f"expected {m.n} coefficients")
    k = np.arange(1, m.n + 1)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.multiply.outer(x, k) * np.pi / m.L) @ u

    return f


def heat_norm(m: HeatModel, u) -> float:
    """L^2(0, L) norm of the sine series with coefficients ``u``."""
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(0.5 * m.L * (u @ u)))


def heat_problem(n: int, s: int = 3, **params) -> Problem:
    """Heat model with ``n`` modes, estimating the first ``s`` of them (Euclidean metric)."""
    m = HeatModel(n=n, **params)
    return Problem(m, np.zeros(n), unit_basis(n, s, [f"mode{k}" for k in range(1, s + 1)]))
