"""Time integration of semi-discrete systems.

Two paths: classical fixed-step RK4 for nonlinear right-hand sides, and an
exact modal solution for linear constant-coefficient systems that are given
already diagonalized.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, InvalidInputError


@dataclass(frozen=True)
class TrajectorySamples:
    """States (and, for second-order systems, velocities) at ``times``.

    ``states[k]`` is the state at ``times[k]``; leading batch axes of the
    initial state are kept, so ``states`` has shape ``(len(times),) + u0.shape``.
    """

    times: np.ndarray
    states: np.ndarray
    velocities: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise InvalidInputError("one state per sample time is required")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("sample times must be strictly ascending")


@dataclass(frozen=True)
class LinearSystem:
    """Diagonalized linear system.

    ``order == 1``: du/dt = V diag(eigenvalues) V^-1 u (eigenvalues of the
    generator, e.g. ``-lambda_k`` for heat modes).
    ``order == 2``: d2u/dt2 = -V diag(eigenvalues) V^-1 u with non-negative
    eigenvalues (squared frequencies).
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    forcing: Optional[np.ndarray] = None
    order: int = 1

    def __post_init__(self):
        n = self.eigenvalues.size
        if self.modes.shape != (n, n):
            raise InvalidInputError(
                f"modes must be {n}x{n}, got {self.modes.shape}"
            )
        if self.forcing is not None and self.forcing.shape != (n,):
            raise InvalidInputError("forcing dimension does not match the system")
        if self.order not in (1, 2):
            raise InvalidInputError("order must be 1 or 2")

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def _rk4_step(rhs, u, h):
    k1 = rhs(u)
    k2 = rhs(u + 0.5 * h * k1)
    k3 = rhs(u + 0.5 * h * k2)
    k4 = rhs(u + h * k3)
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(
    rhs: Callable[[np.ndarray], np.ndarray],
    u0,
    t0: float,
    t1: float,
    dt: float,
    sample_times,
) -> TrajectorySamples:
    """Integrate an autonomous system with classical RK4.

    Each gap between consecutive sample times is split into the fewest equal
    sub-steps no longer than ``dt``, so the states are reported exactly at
    ``sample_times`` without interpolation.
    """
    if not dt > 0:
        raise InvalidInputError(f"time step must be positive, got {dt}")
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidInputError("at least one sample time is required")
    if np.any(np.diff(times) <= 0):
        raise InvalidInputError("sample times must be strictly ascending")
    span = max(abs(t0), abs(t1), 1.0)
    if times[0] < t0 - 1e-12 * span or times[-1] > t1 + 1e-12 * span:
        raise InvalidInputError("sample times must lie within [t0, t1]")

    u = np.array(u0, dtype=float)
    out = np.empty((times.size,) + u.shape)
    t = t0
    with np.errstate(over="ignore", invalid="ignore"):
        for k, tk in enumerate(times):
            gap = tk - t
            if gap > 0:
                n_sub = int(np.ceil(gap / dt - 1e-9))
                h = gap / n_sub
                for i in range(n_sub):
                    u = _rk4_step(rhs, u, h)
                    if not np.all(np.isfinite(u)):
                        raise BlowUpError(t + (i + 1) * h)
            t = tk
            out[k] = u
    return TrajectorySamples(times, out)


def modal_solve(sys: LinearSystem, u0, sample_times, v0=None) -> TrajectorySamples:
    """Exact solution of a diagonalized homogeneous linear system."""
    if sys.forcing is not None and np.any(sys.forcing != 0):
        raise InvalidInputError("modal_solve handles homogeneous systems only")
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (sys.dim,):
        raise InvalidInputError(f"initial state must have shape ({sys.dim},)")
    times = np.asarray(sample_times, dtype=float)
    modes = sys.modes
    c0 = np.linalg.solve(modes, u0)
    if sys.order == 1:
        if v0 is not None:
            raise InvalidInputError("a first-order system takes no initial velocity")
        coeffs = np.exp(np.outer(times, sys.eigenvalues)) * c0
        return TrajectorySamples(times, coeffs @ modes.T)

    v0 = np.zeros(sys.dim) if v0 is None else np.asarray(v0, dtype=float)
    if v0.shape != (sys.dim,):
        raise InvalidInputError(f"initial velocity must have shape ({sys.dim},)")
    if np.any(sys.eigenvalues < 0):
        raise InvalidInputError("second-order eigenvalues must be non-negative")
    d0 = np.linalg.solve(modes, v0)
    omega = np.sqrt(sys.eigenvalues)
    wt = np.outer(times, omega)
    cos, sin = np.cos(wt), np.sin(wt)
    # sin(w t)/w -> t as w -> 0
    safe = np.where(omega > 0, omega, 1.0)
    sinc = np.where(omega > 0, sin / safe, times[:, None])
    pos = (cos * c0 + sinc * d0) @ modes.T
    vel = (-sin * omega * c0 + cos * d0) @ modes.T
    return TrajectorySamples(times, pos, vel)
