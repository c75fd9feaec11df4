"""Resolution sweeps of the unobservability index and their convergence check."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, ObservabilityError, SweepError

log = logging.getLogger(__name__)

METHODS = ("gramian", "empirical", "direct")


@dataclass(frozen=True)
class StudyRecord:
    n: int
    sigma_min: Optional[float]
    epsilon: Optional[float]
    index: Optional[float]
    wall_time_s: float
    method: str
    error: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class StudySeries:
    records: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = [r.n for r in self.records]
        if ns != sorted(ns):
            raise InvalidInputError("records must be sorted by n")

    @property
    def n_values(self) -> list:
        return [r.n for r in self.records]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) if hasattr(r, name) else r.extra[name]
                         for r in self.records], dtype=float)


@dataclass(frozen=True)
class Problem:
    """What one resolution needs: a model, the nominal initial state and the estimation basis."""

    model: object
    nominal: np.ndarray
    basis: object


def evaluate(problem: Problem, method: str, rho: float = 0.1, seed: int = 0, **search):
    """Unobservability index of one problem by the chosen method."""
    from .observability import (
        direct_index_search,
        empirical_gramian,
        linear_gramian,
        unobservability_index,
    )

    if method == "gramian":
        pair = linear_gramian(problem.model, problem.basis)
        pair = type(pair)(pair.g, pair.s, rho, pair.basis_labels)
        return unobservability_index(pair, problem.basis, method="gramian")
    if method == "empirical":
        pair = empirical_gramian(problem.model, problem.nominal, problem.basis, rho)
        return unobservability_index(pair, problem.basis, method="empirical")
    if method == "direct":
        return direct_index_search(problem.model, problem.nominal, problem.basis, rho,
                                   seed=seed, **search)
    raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")


def _run_one(args):
    factory, n, method, rho, seed, search = args
    start = time.perf_counter()
    try:
        res = evaluate(factory(n), method, rho, seed, **search)
    except ObservabilityError as exc:
        log.warning("n = %d failed: %s", n, exc)
        return StudyRecord(n, None, None, None, time.perf_counter() - start, method,
                           error=f"{type(exc).__name__}: {exc}")
    return StudyRecord(n, res.sigma_min, res.epsilon, res.index,
                       time.perf_counter() - start, method)


def sweep(
    model_factory: Callable[[int], Problem],
    n_values: Sequence[int],
    method: str = "empirical",
    rho: float = 0.1,
    seed: int = 0,
    workers: int = 1,
    metadata: Optional[dict] = None,
    **search,
) -> StudySeries:
    """One index record per resolution in ``n_values``.

    Failures at a given n are kept as records carrying the error text; the
    sweep only raises when every resolution failed. With ``workers > 1`` the
    resolutions run in separate processes (``model_factory`` must then be
    picklable); records come back in n order either way.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise InvalidInputError("n_values is empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidInputError("n_values must be strictly ascending")
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")
    jobs = [(model_factory, n, method, rho, seed, search) for n in n_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(job) for job in jobs]
    if all(not r.ok for r in records):
        raise SweepError("every resolution failed", [r.error for r in records])
    meta = {"method": method, "rho": rho, "seed": seed}
    meta.update(metadata or {})
    return StudySeries(records, meta)


@dataclass(frozen=True)
class ConvergenceReport:
    plateau: float
    last_change: float
    converged: bool
    changes: list  # (n, value, relative change from the previous record)
    cauchy: np.ndarray  # |v_i - v_j| / |v_j|

    def lines(self) -> list:
        out = [f"{'n':>6} {'value':>14} {'rel. change':>12}"]
        for n, v, c in self.changes:
            out.append(f"{n:>6d} {v:>14.8g} {'' if c is None else f'{c:12.3e}':>12}")
        out.append(f"plateau {self.plateau:.8g}, converged = {self.converged}")
        return out


def convergence_diagnostics(series: StudySeries, key: str = "index",
                            rel_tol: float = 0.01, window: int = 3) -> ConvergenceReport:
    """Plateau = last value; converged when the final ``window`` relative changes are all < ``rel_tol``.

    Relative changes are taken against the earlier value of each pair. Failed
    records are skipped.
    """
    good = [r for r in series.records if r.ok]
    if len(good) < 3:
        raise InvalidInputError("convergence diagnostics need at least three records")
    values = np.array([getattr(r, key) if hasattr(r, key) else r.extra[key] for r in good],
                      dtype=float)
    rel = np.abs(np.diff(values)) / np.abs(values[:-1])
    tail = rel[-min(window, rel.size):]
    changes = [(good[0].n, float(values[0]), None)]
    changes += [(r.n, float(v), float(c)) for r, v, c in zip(good[1:], values[1:], rel)]
    cauchy = np.abs(values[:, None] - values[None, :]) / np.abs(values[None, :])
    return ConvergenceReport(
        plateau=float(values[-1]),
        last_change=float(rel[-1]),
        converged=bool(np.all(tail < rel_tol)),
        changes=changes,
        cauchy=cauchy,
    )
