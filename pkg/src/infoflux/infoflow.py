"""Information flow, min-entropy and single-shot leakage of a reduced map.

For a pair of subsystem states the distinguishability after the map is the
trace distance ``D``; the optimal equal-prior guessing probability is
``(1 + D) / 2`` and the conditional min-entropy of the matching
classical-quantum state is ``-log2`` of it. The flow at ``t`` is the largest
time derivative of ``D`` over sampled orthogonal pure pairs, and the
leakage integrates ``-sigma / (c p*)`` with ``c = 2 ln 2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .constants import ENTROPY_RATE_CONSTANT
from .errors import PreconditionError
from .qla import trace_norm_hermitian
from .qstate import sample_orthogonal_pairs
from .redyn import apply, channel_at, pauli_basis, unit_images

__all__ = [
    "FlowEstimator",
    "FlowRecord",
    "LeakageResult",
    "conditional_min_entropy",
    "guessing_probability",
    "information_flow",
    "leakage",
    "proposition_check",
    "proposition_tolerance",
    "trace_distance",
]

# unit-image blocks held in memory at once when scanning many times
_TIME_CHUNK = 64


def trace_distance(rho0, rho1) -> float:
    rho0 = np.asarray(rho0, dtype=np.complex128)
    rho1 = np.asarray(rho1, dtype=np.complex128)
    if rho0.shape != rho1.shape:
        raise PreconditionError(f"shape mismatch {rho0.shape} vs {rho1.shape}")
    return 0.5 * trace_norm_hermitian(rho0 - rho1)


def guessing_probability_from_distance(distance):
    return 0.5 * (1.0 + distance)


def min_entropy_from_distance(distance):
    return -np.log2(guessing_probability_from_distance(distance))


def guessing_probability(rho0, rho1) -> float:
    """Helstrom success probability for two equiprobable states."""
    return guessing_probability_from_distance(trace_distance(rho0, rho1))


def conditional_min_entropy(rho0, rho1) -> float:
    """``H_min(A|B)`` in bits of the equal-weight cq state built from ``rho0, rho1``."""
    return float(min_entropy_from_distance(trace_distance(rho0, rho1)))


@dataclass(frozen=True)
class FlowRecord:
    t: float
    sigma: float
    p_guess_star: float
    argmax_index: int
    argmax_pair: tuple[np.ndarray, np.ndarray] = field(repr=False)
    sample_count: int
    n_s: int
    stencil: tuple[float, float]
    distance: float
    sigma_tilde: float | None = None
    leakage: float | None = None


@dataclass(frozen=True)
class LeakageResult:
    """Leakage in bits over ``[times[0], times[-1]]`` with its running series."""

    leakage: float
    times: np.ndarray
    sigma_tilde: np.ndarray
    leakage_series: np.ndarray
    records: list[FlowRecord]


def stencil(engine, t: float) -> tuple[float, float]:
    """Difference stencil ``(lo, hi)`` around ``t``, one-sided at the run ends."""
    h = engine.derivative_step
    end = engine.run_time
    if engine.discrete:
        # forward unit difference; backward at the last iteration
        return (t, t + 1.0) if t + 1.0 <= end else (t - 1.0, t)
    lo, hi = max(t - h, 0.0), min(t + h, end)
    return lo, hi


class FlowEstimator:
    """Sampled flow for one engine and subsystem, with a fixed pair set.

    The same ``sample_count`` orthogonal Haar pairs (sample ``j`` drawn from
    its own stream derived from ``seed``) are used at every time, so time
    series carry no re-sampling jitter.
    """

    def __init__(self, engine, n_s: int, sample_count: int = 10_000, seed: int = 0,
                 keep=None, workers: int = 1, pairs=None):
        if sample_count < 1:
            raise PreconditionError("sample_count must be at least 1")
        self.engine = engine
        self.n_s = n_s
        self.keep = keep
        self.workers = max(1, int(workers))
        self.seed = seed
        if pairs is None:
            pairs = sample_orthogonal_pairs(n_s, sample_count, seed)
        self.psi, self.perp = pairs
        self.sample_count = len(self.psi)
        basis = pauli_basis(n_s)
        diff = (np.einsum("si,sj->sij", self.psi, self.psi.conj())
                - np.einsum("si,sj->sij", self.perp, self.perp.conj()))
        # real coefficients of rho0 - rho1 in the Pauli basis, (samples, 4**n_s)
        self._coeffs = np.einsum("kij,sji->sk", basis, diff).real
        self._basis = basis
        self._cache: dict[float, np.ndarray] = {}

    def _distances_from_units(self, units: np.ndarray) -> np.ndarray:
        d = 2**self.n_s
        images = np.einsum("kij,ijab->kab", self._basis, units).reshape(len(self._basis), d * d)
        out = (self._coeffs @ images).reshape(-1, d, d)
        evals = np.linalg.eigvalsh(out)
        return 0.5 * np.abs(evals).sum(axis=1)

    def distances(self, times) -> np.ndarray:
        """``D(Lambda_t rho0_j, Lambda_t rho1_j)`` for every time and sample; shape (T, S)."""
        times = [float(t) for t in np.atleast_1d(times)]
        missing = sorted(set(t for t in times if t not in self._cache))
        for start in range(0, len(missing), _TIME_CHUNK):
            chunk = missing[start:start + _TIME_CHUNK]
            units = unit_images(self.engine, chunk, self.n_s, self.keep)
            if self.workers > 1:
                with ThreadPoolExecutor(self.workers) as pool:
                    values = list(pool.map(self._distances_from_units, units))
            else:
                values = [self._distances_from_units(u) for u in units]
            self._cache.update(zip(chunk, values))
        return np.array([self._cache[t] for t in times])

    def records(self, times) -> list[FlowRecord]:
        times = [float(t) for t in np.atleast_1d(times)]
        stencils = [stencil(self.engine, t) for t in times]
        needed = set(times)
        for lo, hi in stencils:
            needed.update((lo, hi))
        self.distances(sorted(needed))
        out = []
        for t, (lo, hi) in zip(times, stencils):
            rate = (self._cache[hi] - self._cache[lo]) / (hi - lo)
            j = int(np.argmax(rate))  # lowest index wins ties
            dist = float(self._cache[t][j])
            out.append(FlowRecord(
                t=t,
                sigma=float(rate[j]),
                p_guess_star=guessing_probability_from_distance(dist),
                argmax_index=j,
                argmax_pair=(self.psi[j], self.perp[j]),
                sample_count=self.sample_count,
                n_s=self.n_s,
                stencil=(lo, hi),
                distance=dist,
            ))
        return out

    def record(self, t: float) -> FlowRecord:
        return self.records([t])[0]

    def series(self, times) -> LeakageResult:
        """Records on ``times`` plus cumulative ``sigma_tilde`` and leakage from ``times[0]``."""
        times = np.asarray(times, dtype=float)
        if times.size == 0:
            raise PreconditionError("time grid is empty")
        recs = self.records(times)
        sigma = np.array([r.sigma for r in recs])
        p_star = np.array([r.p_guess_star for r in recs])
        if times.size == 1:
            tilde = np.zeros(1)
            leak = np.zeros(1)
        else:
            tilde = cumulative_trapezoid(sigma, times, initial=0.0)
            leak = cumulative_trapezoid(-sigma / (ENTROPY_RATE_CONSTANT * p_star), times, initial=0.0)
        recs = [replace(r, sigma_tilde=float(a), leakage=float(b))
                for r, a, b in zip(recs, tilde, leak)]
        return LeakageResult(float(leak[-1]), times, tilde, leak, recs)


def information_flow(engine, n_s: int, t: float, sample_count: int = 10_000,
                     seed: int = 0, keep=None) -> FlowRecord:
    """Flow ``sigma_t`` at one time from ``sample_count`` orthogonal Haar pairs."""
    return FlowEstimator(engine, n_s, sample_count, seed, keep=keep).record(t)


def leakage(engine, n_s: int, t1: float, t2: float, grid=200, sample_count: int = 10_000,
            seed: int = 0, keep=None, estimator: FlowEstimator | None = None) -> LeakageResult:
    """Single-shot leakage over ``[t1, t2]`` by the trapezoid rule.

    ``grid`` is either a point count (evenly spaced; the circuit engine
    always uses its integer iterations) or an explicit ascending array.
    """
    if t2 < t1:
        raise PreconditionError("t2 must not precede t1")
    if np.ndim(grid) == 0:
        points = int(grid)
        if points < 1:
            raise PreconditionError("time grid is empty")
        if engine.discrete:
            times = np.arange(math.ceil(t1), math.floor(t2) + 1, dtype=float)
        else:
            times = np.linspace(t1, t2, points) if t2 > t1 else np.array([t1])
    else:
        times = np.asarray(grid, dtype=float)
    if times.size == 0:
        raise PreconditionError("time grid is empty")
    if t1 == t2:
        times = times[:1]
    est = estimator or FlowEstimator(engine, n_s, sample_count, seed, keep=keep)
    return est.series(times)


def proposition_tolerance(sigma: float) -> float:
    return max(1e-6, 1e-3 * abs(sigma))


def _log_mean(a: float, b: float) -> float:
    if abs(a - b) <= 1e-15 * max(a, b):
        return 0.5 * (a + b)
    return (b - a) / (math.log(b) - math.log(a))


def proposition_check(record: FlowRecord, engine, t: float | None = None, keep=None) -> float:
    """``|sigma - (-c p* dH_min/dt)|`` on the record's maximising pair.

    The min-entropy derivative uses the record's own difference stencil,
    with the channels rebuilt from scratch and the trace distances taken by
    dense eigendecomposition. On the circuit's unit-step clock ``p*`` is
    the logarithmic mean of the guessing probability over the stencil,
    which is the value for which ``Delta log p = Delta p / p*`` holds
    exactly; continuous engines use ``p*`` at ``t``.
    """
    t = record.t if t is None else float(t)
    lo, hi = record.stencil
    psi, perp = record.argmax_pair
    rho0, rho1 = np.outer(psi, psi.conj()), np.outer(perp, perp.conj())

    def h_min(time):
        snap = channel_at(engine, time, record.n_s, keep=keep)
        return conditional_min_entropy(apply(snap, rho0), apply(snap, rho1))

    h_lo, h_hi = h_min(lo), h_min(hi)
    rate = (h_hi - h_lo) / (hi - lo)
    if engine.discrete:
        p_star = _log_mean(2.0 ** -h_lo, 2.0 ** -h_hi)
    else:
        p_star = record.p_guess_star
    rhs = -ENTROPY_RATE_CONSTANT * p_star * rate
    return abs(record.sigma - rhs)
