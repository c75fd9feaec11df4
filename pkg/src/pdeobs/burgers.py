"""Viscous Burgers' equation on a uniform grid with three point sensors.

Grid x_j = j L/n, j = 1..n-1, homogeneous Dirichlet ends, central differences
in space and RK4 in time. Grid vectors are lifted to functions by the
trigonometric interpolant built from their discrete Fourier coefficients, and
the state norm is the L^2 norm of that interpolant.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .consistency import Problem
from .errors import InvalidInputError
from .linalg import SymMatrix, gram_schmidt
from .observability import EstimationBasis, OutputSeries
from .ode import TrajectorySamples, rk4_integrate

# (alpha_0, alpha_1, beta_1, alpha_2, beta_2) of -2 + cos x + sin x + cos 2x + sin 2x
NOMINAL_COEFFS = (-4.0, 1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class BurgersModel:
    L: float = 2 * np.pi
    T: float = 5.0
    kappa: float = 0.14
    n: int = 40
    nt_sensors: int = 20
    sensor_x: Optional[tuple] = None  # None: L/4, L/2, 3L/4
    kf: int = 2
    dt: Optional[float] = None  # None: stability rule below
    dt_scale: float = 1.0

    is_linear = False

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidInputError(f"n must be even and >= 4, got {self.n}")
        if self.kf < 1 or 2 * self.kf + 1 > self.n - 1:
            raise InvalidInputError(f"kf = {self.kf} does not fit a grid with n = {self.n}")
        if not (self.L > 0 and self.T > 0 and self.kappa > 0):
            raise InvalidInputError("L, T and kappa must be positive")
        if self.nt_sensors < 1:
            raise InvalidInputError("need at least one sampling interval")
        if any(not 0 < x < self.L for x in self.sensors):
            raise InvalidInputError("sensor locations must lie strictly inside (0, L)")
        if self.dt is not None and not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if not self.dt_scale > 0:
            raise InvalidInputError("dt_scale must be positive")

    @property
    def sensors(self) -> tuple:
        if self.sensor_x is None:
            return (self.L / 4, self.L / 2, 3 * self.L / 4)
        return tuple(float(x) for x in self.sensor_x)

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def state_dim(self) -> int:
        return self.n - 1

    @cached_property
    def grid(self) -> np.ndarray:
        return self.dx * np.arange(1, self.n)

    @property
    def sensor_times(self) -> np.ndarray:
        return self.T * np.arange(self.nt_sensors + 1) / self.nt_sensors

    @property
    def time_weights(self) -> np.ndarray:
        return np.ones(self.nt_sensors + 1)

    @cached_property
    def step(self) -> float:
        """Integrator step: ``dt`` if given, else 0.25 min(dx^2/(2 kappa), dx/max(1, |u0|_inf))
        with u0 the projected nominal state; multiplied by ``dt_scale``."""
        if self.dt is not None:
            return self.dt * self.dt_scale
        amp = max(1.0, float(np.max(np.abs(nominal_state(self)))))
        return 0.25 * min(self.dx**2 / (2 * self.kappa), self.dx / amp) * self.dt_scale

    @cached_property
    def _coeff_matrices(self):
        x = self.grid
        ka = np.arange(self.n // 2 + 1)
        kb = np.arange(1, self.n // 2)
        w = 2 * np.pi / self.L
        ca = (2.0 / self.n) * np.cos(w * np.outer(ka, x))
        cb = (2.0 / self.n) * np.sin(w * np.outer(kb, x))
        return ca, cb

    @cached_property
    def _stencils(self) -> np.ndarray:
        """Transposed [first-difference | kappa * second-difference] operators, side by side."""
        k = self.state_dim
        up = np.eye(k, k=1)
        down = np.eye(k, k=-1)
        first = (up - down) / (2 * self.dx)
        second = self.kappa * (up + down - 2 * np.eye(k)) / self.dx**2
        return np.hstack([first.T, second.T])

    @cached_property
    def _sensor_matrix(self) -> np.ndarray:
        return interpolation_matrix(self, np.array(self.sensors))

    def simulate(self, u0s) -> TrajectorySamples:
        """Trajectory sampled at the sensor times; ``u0s`` may carry a batch axis."""
        return rk4_integrate(
            lambda u: burgers_rhs(self, u), u0s, 0.0, self.T, self.step, self.sensor_times
        )

    def responses(self, u0s) -> np.ndarray:
        u0s = np.atleast_2d(np.asarray(u0s, dtype=float))
        states = self.simulate(u0s).states  # (n_times, m, n-1)
        return np.einsum("tmj,pj->mtp", states, self._sensor_matrix)


def burgers_rhs(m: BurgersModel, u) -> np.ndarray:
    """Central-difference right-hand side; works on the last axis of ``u``.

    Component i: -u_i (u_{i+1} - u_{i-1})/(2 dx) + kappa (u_{i+1} + u_{i-1} - 2 u_i)/dx^2,
    with u_0 = u_n = 0.
    """
    u = np.asarray(u, dtype=float)
    w = u @ m._stencils
    k = m.state_dim
    return w[..., k:] - u * w[..., :k]


def project(m: BurgersModel, v: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Point samples v(x_j), j = 1..n-1."""
    return np.asarray(v(m.grid), dtype=float) * np.ones(m.state_dim)


def fourier_coeffs(m: BurgersModel, v):
    """Discrete coefficients a_0..a_{n/2} and b_1..b_{n/2-1} of a grid vector."""
    v = np.asarray(v, dtype=float)
    ca, cb = m._coeff_matrices
    return ca @ v, cb @ v


def _trig_rows(m: BurgersModel, xs) -> np.ndarray:
    """Rows of the map (a, b) -> interpolant values at ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    w = 2 * np.pi / m.L
    half = m.n // 2
    ka = np.arange(half + 1)
    cos = np.cos(w * np.outer(xs, ka))
    cos[:, 0] *= 0.5
    cos[:, half] *= 0.5
    sin = np.sin(w * np.outer(xs, np.arange(1, half)))
    return np.hstack([cos, sin])


def interpolation_matrix(m: BurgersModel, xs) -> np.ndarray:
    """Matrix taking a grid vector to its interpolant's values at ``xs``."""
    ca, cb = m._coeff_matrices
    return _trig_rows(m, xs) @ np.vstack([ca, cb])


def lift(m: BurgersModel, v) -> Callable[[np.ndarray], np.ndarray]:
    """Trigonometric interpolant of a grid vector, as a callable on [0, L]."""
    a, b = fourier_coeffs(m, v)
    coeffs = np.concatenate([a, b])

    def f(x):
        scalar = np.ndim(x) == 0
        vals = _trig_rows(m, x) @ coeffs
        return float(vals[0]) if scalar else vals.reshape(np.shape(x))

    return f


def n_inner(m: BurgersModel, u, v) -> float:
    """Inner product whose norm is the L^2(0, L) norm of the interpolant."""
    au, bu = fourier_coeffs(m, u)
    av, bv = fourier_coeffs(m, v)
    half = m.n // 2
    s = au[0] * av[0] / 2 + au[1:half] @ av[1:half] + bu @ bv + au[half] * av[half] / 4
    return float(m.L / 2 * s)


def n_norm(m: BurgersModel, v) -> float:
    return float(np.sqrt(max(n_inner(m, v, v), 0.0)))


def trig_poly(m: BurgersModel, coeffs) -> Callable[[np.ndarray], np.ndarray]:
    """alpha_0/2 + sum_k alpha_k cos(2 pi k x/L) + beta_k sin(2 pi k x/L).

    ``coeffs`` is ordered (alpha_0, alpha_1, beta_1, ..., alpha_K, beta_K).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size % 2 == 0:
        raise InvalidInputError("need 2K + 1 coefficients")
    w = 2 * np.pi / m.L

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, c[0] / 2)
        for k in range(1, (c.size - 1) // 2 + 1):
            out = out + c[2 * k - 1] * np.cos(w * k * x) + c[2 * k] * np.sin(w * k * x)
        return out

    return f


def nominal_initial_condition(m: BurgersModel) -> Callable[[np.ndarray], np.ndarray]:
    return trig_poly(m, NOMINAL_COEFFS)


def nominal_state(m: BurgersModel) -> np.ndarray:
    return project(m, nominal_initial_condition(m))


def constraint_row(kf: int) -> np.ndarray:
    """Coefficients of alpha_0/2 + sum_k alpha_k in (alpha_0, alpha_1, beta_1, ...) order."""
    row = np.zeros(2 * kf + 1)
    row[0] = 0.5
    row[1::2] = 1.0
    return row


def raw_coefficient_directions(kf: int) -> np.ndarray:
    """Null-space directions of the boundary constraint, one per Fourier coefficient.

    For each k: (alpha_0 = -2, alpha_k = 1), i.e. cos(2 pi k x/L) - 1, and
    beta_k = 1, i.e. sin(2 pi k x/L).
    """
    dirs = []
    for k in range(1, kf + 1):
        a = np.zeros(2 * kf + 1)
        a[0], a[2 * k - 1] = -2.0, 1.0
        b = np.zeros(2 * kf + 1)
        b[2 * k] = 1.0
        dirs += [a, b]
    return np.array(dirs)


def estimation_basis(m: BurgersModel, orthonormal: bool = True) -> EstimationBasis:
    """Basis of the sampled constrained subspace of trigonometric polynomials of degree kf.

    With ``orthonormal=True`` the vectors are Gram-Schmidt orthonormalized in
    the state inner product, so the Gram matrix is the identity; otherwise the
    raw constrained directions are returned with their Gram matrix.
    """
    raw = raw_coefficient_directions(m.kf)
    vectors = [project(m, trig_poly(m, c)) for c in raw]

    def inner(u, v):
        return n_inner(m, u, v)

    if orthonormal:
        vectors = gram_schmidt(vectors, inner)
        labels = tuple(f"w{i + 1}" for i in range(len(vectors)))
    else:
        labels = tuple(f"{p}{k}" for k in range(1, m.kf + 1) for p in ("alpha", "beta"))
    vectors = np.array(vectors)
    gram = SymMatrix([[inner(u, v) for v in vectors] for u in vectors])
    coeff_map = np.array([_coeffs_in_w(m, v) for v in vectors])
    return EstimationBasis(vectors, gram, labels, coeff_map)


def _coeffs_in_w(m: BurgersModel, v) -> np.ndarray:
    """(alpha_0, alpha_1, beta_1, ..., alpha_kf, beta_kf) of a sampled polynomial in W."""
    a, b = fourier_coeffs(m, v)
    out = [a[0]]
    for k in range(1, m.kf + 1):
        out += [a[k], b[k - 1]]
    return np.array(out)


def sample_outputs(m: BurgersModel, trajectory: TrajectorySamples) -> OutputSeries:
    """Sensor readings of the interpolated state at t_k = k T / N_t."""
    expected = m.sensor_times
    times = trajectory.times
    if times.shape != expected.shape or not np.allclose(times, expected, rtol=0, atol=1e-12 * m.T):
        raise InvalidInputError("trajectory is not sampled at the sensor times")
    values = np.einsum("t...j,pj->t...p", trajectory.states, m._sensor_matrix)
    return OutputSeries(times, values, m.time_weights)


def burgers_problem(n: int, **params) -> Problem:
    """Burgers model at resolution ``n`` with its nominal state and orthonormal basis."""
    m = BurgersModel(n=n, **params)
    return Problem(m, nominal_state(m), estimation_basis(m))
