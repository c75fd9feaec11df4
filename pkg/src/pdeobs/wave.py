"""Finite-difference wave equation and its boundary observability ratio.

Interior points x_j = j h, j = 1..n, h = L/(n+1), fixed ends. The discrete
Laplacian is diagonalized exactly (sine modes), so trajectories are computed
mode by mode with no time-stepping error.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .consistency import StudyRecord, StudySeries
from .errors import InvalidInputError
from .linalg import trapezoid_quadrature
from .ode import LinearSystem, TrajectorySamples, modal_solve


@dataclass(frozen=True)
class WaveModel:
    L: float = 1.0
    T: float = 3.0
    n: int = 50
    initial_mode: int = 1

    def __post_init__(self):
        if not self.T > 2 * self.L:
            raise InvalidInputError(f"horizon T = {self.T} must exceed 2L = {2 * self.L}")
        if not 1 <= self.initial_mode <= self.n:
            raise InvalidInputError(f"initial_mode must be in [1, {self.n}]")

    @property
    def h(self) -> float:
        return self.L / (self.n + 1)

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)


def discrete_modes(m: WaveModel):
    """Frequencies (ascending) and mode shapes (columns) of the discrete Laplacian."""
    k = np.arange(1, m.n + 1)
    lam = (4.0 / m.h**2) * np.sin(k * np.pi * m.h / (2 * m.L)) ** 2
    shapes = np.sin(np.outer(m.grid, k) * np.pi / m.L)
    return np.sqrt(lam), shapes


def mode_shape(m: WaveModel, k: int) -> np.ndarray:
    return np.sin(k * np.pi * m.grid / m.L)


def solve_wave(m: WaveModel, u0, v0, sample_times) -> TrajectorySamples:
    omega, shapes = discrete_modes(m)
    sys = LinearSystem(omega**2, shapes, order=2)
    return modal_solve(sys, u0, sample_times, v0=v0)


def total_energy(m: WaveModel, positions, velocities) -> float:
    """(h/2) sum_{j=0}^{n} (|u'_j|^2 + |(u_{j+1} - u_j)/h|^2) with u_0 = u_{n+1} = 0."""
    u = np.concatenate(([0.0], np.asarray(positions, dtype=float), [0.0]))
    v = np.asarray(velocities, dtype=float)
    grad = np.diff(u) / m.h
    return float(0.5 * m.h * (v @ v + grad @ grad))


def boundary_energy(m: WaveModel, trajectory: TrajectorySamples) -> float:
    """int_0^T |u_n(t)/h|^2 dt by the trapezoid rule on the (uniform) trajectory times."""
    times = trajectory.times
    if times.size < 2:
        raise InvalidInputError("need at least two samples")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
        raise InvalidInputError("boundary energy needs uniformly spaced samples")
    last = trajectory.states[:, -1] / m.h
    return trapezoid_quadrature(last * last, dt)


def observability_ratio(m: WaveModel, nt_quad: int | None = None):
    """E_h(0) / boundary energy for the mode-``initial_mode`` initial position.

    Returns ``(energy, boundary_energy, ratio)``. The default quadrature uses
    64 samples per interior point, which resolves the fastest mode with
    at least 32 points per period.
    """
    nt_quad = 64 * m.n if nt_quad is None else nt_quad
    u0 = mode_shape(m, m.initial_mode)
    v0 = np.zeros(m.n)
    traj = solve_wave(m, u0, v0, np.linspace(0.0, m.T, nt_quad))
    e0 = total_energy(m, u0, v0)
    eb = boundary_energy(m, traj)
    return e0, eb, e0 / eb


def observability_ratio_sweep(
    template: WaveModel, n_values: Sequence[int], initial_mode: int | None = None
) -> StudySeries:
    """Energy ratio per grid size.

    With ``initial_mode=None`` each run starts from its highest discrete mode
    (k = n); otherwise the given mode is used for every n.
    """
    n_values = list(n_values)
    if not n_values:
        raise InvalidInputError("n_values is empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidInputError("n_values must be strictly ascending")
    records = []
    for n in n_values:
        start = time.perf_counter()
        k = n if initial_mode is None else initial_mode
        m = replace(template, n=n, initial_mode=k)
        e0, eb, ratio = observability_ratio(m)
        records.append(
            StudyRecord(
                n, None, None, None, time.perf_counter() - start, "energy-ratio",
                extra={"initial_mode": k, "energy": e0, "boundary_energy": eb, "ratio": ratio},
            )
        )
    meta = {
        "model": "wave",
        "L": template.L,
        "T": template.T,
        "initial_mode": "highest" if initial_mode is None else initial_mode,
    }
    return StudySeries(records, meta)
