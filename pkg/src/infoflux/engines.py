"""Amplitude-amplification dynamics: gate circuit, analog Hamiltonian, adiabatic sweep.

Every engine starts from the uniform superposition ``|+>^n`` and exposes
``evolve(vectors, times)``, which applies the global propagator ``U(t)`` to
a block of column vectors for each requested time. The circuit engine runs
on an integer clock (Grover iterations); the other two on continuous time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import IntegrationStepError, PreconditionError
from .qla import herm_eig, matexp_unitary
from .qstate import _check_register, basis_state, uniform_superposition

__all__ = [
    "AdiabaticEngine",
    "AnalogEngine",
    "CircuitEngine",
    "Engine",
    "Trajectory",
    "adiabatic_runtime",
    "adiabatic_schedule",
    "adiabatic_trajectory",
    "analog_trajectory",
    "circuit_trajectory",
    "grover_unitary",
    "make_engine",
    "optimal_iterations",
    "asymptotic_adiabatic_runtime",
    "success_probability",
]

ENGINE_KINDS = ("circuit", "analog", "adiabatic")

# continuous engines difference D over this fraction of the run
DERIVATIVE_DIVISIONS = 2000
DEFAULT_ADIABATIC_STEPS = 2000
CONVERGENCE_TOL = 1e-6
MAX_REFINEMENTS = 10


def success_probability(state, w: int) -> float:
    """Probability of reading the basis label ``w``."""
    return float(abs(np.asarray(state)[w]) ** 2)


def _validate(n: int, w: int) -> None:
    _check_register(n)
    if not 0 <= w < 2**n:
        raise PreconditionError(f"target {w} outside [0, {2**n})")


def grover_unitary(n: int, w: int) -> np.ndarray:
    """Grover iteration ``(2|psi_n><psi_n| - I) G_w`` as a dense matrix.

    ``G_w`` negates basis column ``w``. For ``w = 0`` this is the matrix
    with diagonal ``2**(1-n) - 1``, off-diagonals ``2**(1-n)`` and column 0
    negated.
    """
    _validate(n, w)
    psi = uniform_superposition(n)
    u = 2.0 * np.outer(psi, psi.conj()) - np.eye(2**n)
    u[:, w] *= -1.0
    return u


def optimal_iterations(n: int) -> int:
    """``floor(pi / (4 theta))`` with ``sin(theta) = 2**(-n/2)``."""
    theta = math.asin(2.0 ** (-n / 2))
    return max(1, int(math.floor(math.pi / (4.0 * theta))))


@dataclass(frozen=True)
class Trajectory:
    time_grid: np.ndarray
    global_states: np.ndarray  # shape (len(time_grid), 2**n)
    engine: "Engine"

    def success_probabilities(self) -> np.ndarray:
        return np.abs(self.global_states[:, self.engine.w]) ** 2


class Engine:
    """Common surface of the three dynamics."""

    kind: str = ""
    discrete: bool = False

    def __init__(self, n: int, w: int = 0):
        _validate(n, w)
        self.n = n
        self.w = w
        self.dim = 2**n
        self.initial_state = uniform_superposition(n)

    @property
    def run_time(self) -> float:
        raise NotImplementedError

    @property
    def derivative_step(self) -> float:
        """Stencil half-width for time derivatives of distinguishability."""
        return 1.0 if self.discrete else self.run_time / DERIVATIVE_DIVISIONS

    def params(self) -> dict:
        return {"engine": self.kind, "n": self.n, "target": self.w}

    def default_grid(self, points: int = 200) -> np.ndarray:
        return np.linspace(0.0, self.run_time, points)

    def check_times(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise PreconditionError("times must be non-negative")
        return times

    def evolve(self, vectors, times) -> np.ndarray:
        """``U(t) @ vectors`` for every ``t``; shape ``(len(times),) + vectors.shape``."""
        raise NotImplementedError

    def unitary(self, t: float) -> np.ndarray:
        return self.evolve(np.eye(self.dim, dtype=np.complex128), [t])[0]

    def states(self, times) -> np.ndarray:
        return self.evolve(self.initial_state, times)

    def trajectory(self, times=None) -> Trajectory:
        times = self.default_grid() if times is None else self.check_times(times)
        return Trajectory(np.asarray(times, dtype=float), self.states(times), self)


class CircuitEngine(Engine):
    """Repeated Grover iterations; time is the iteration count."""

    kind = "circuit"
    discrete = True

    def __init__(self, n: int, w: int = 0, k_max: int | None = None):
        super().__init__(n, w)
        self.k_max = optimal_iterations(n) if k_max is None else int(k_max)
        if self.k_max < 1:
            raise PreconditionError("k_max must be at least 1")

    @property
    def run_time(self) -> float:
        return float(self.k_max)

    def params(self) -> dict:
        return {**super().params(), "k_max": self.k_max}

    def default_grid(self, points: int = 0) -> np.ndarray:
        return np.arange(self.k_max + 1, dtype=float)

    def check_times(self, times) -> np.ndarray:
        times = super().check_times(times)
        if np.any(times != np.round(times)):
            raise PreconditionError("circuit times are integer iteration counts")
        return times

    def _step(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        v[self.w] *= -1.0
        psi = self.initial_state
        overlap = psi.conj() @ v
        return 2.0 * np.multiply.outer(psi, overlap) - v

    def evolve(self, vectors, times) -> np.ndarray:
        times = self.check_times(times).astype(int)
        v = np.array(vectors, dtype=np.complex128)
        out = np.empty((len(times),) + v.shape, dtype=np.complex128)
        order = np.argsort(times, kind="stable")
        k = 0
        for idx in order:
            while k < times[idx]:
                v = self._step(v)
                k += 1
            out[idx] = v
        return out


class AnalogEngine(Engine):
    """Time-independent ``H = E (|w><w| + |psi_n><psi_n|)``."""

    kind = "analog"

    def __init__(self, n: int, w: int = 0, energy: float = 1.0):
        super().__init__(n, w)
        if not energy > 0:
            raise PreconditionError("energy constant E must be positive")
        self.energy = float(energy)
        target = basis_state(n, w)
        psi = self.initial_state
        self.hamiltonian = self.energy * (np.outer(target, target) + np.outer(psi, psi.conj()))
        self._evals, self._evecs = herm_eig(self.hamiltonian)

    @property
    def run_time(self) -> float:
        return math.pi * math.sqrt(self.dim) / (2.0 * self.energy)

    def params(self) -> dict:
        return {**super().params(), "energy": self.energy}

    def unitary(self, t: float) -> np.ndarray:
        return matexp_unitary(self.hamiltonian, t)

    def evolve(self, vectors, times) -> np.ndarray:
        times = self.check_times(times)
        v = np.asarray(vectors, dtype=np.complex128)
        coeffs = self._evecs.conj().T @ v
        out = np.empty((len(times),) + v.shape, dtype=np.complex128)
        for i, t in enumerate(times):
            phases = np.exp(-1j * self._evals * t)
            if v.ndim == 2:
                phases = phases[:, None]
            out[i] = self._evecs @ (phases * coeffs)
        return out


def adiabatic_runtime(n: int, epsilon: float) -> float:
    """Exact end time of the local-adiabatic schedule, ``N atan(r) / (eps r)``, ``r = sqrt(N-1)``."""
    big_n = 2**n
    r = math.sqrt(big_n - 1)
    return big_n * math.atan(r) / (epsilon * r)


def asymptotic_adiabatic_runtime(n: int, epsilon: float) -> float:
    """Large-N form ``sqrt(N) pi / (2 eps)`` of :func:`adiabatic_runtime`."""
    return math.sqrt(2**n) * math.pi / (2.0 * epsilon)


def adiabatic_schedule(n: int, epsilon: float, t):
    """Weight ``f(t)`` of the initial Hamiltonian; 1 at ``t = 0``, 0 at the end.

    ``f = 1 - s`` with ``s = 1/2 + tan(2 eps t r / N - atan r) / (2 r)``,
    the schedule whose sweep rate ``ds/dt`` is ``eps`` times the squared
    instantaneous gap.
    """
    total = adiabatic_runtime(n, epsilon)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12 * total) or np.any(t_arr > total * (1 + 1e-12)):
        raise PreconditionError(f"schedule time outside [0, {total}]")
    big_n = 2**n
    r = math.sqrt(big_n - 1)
    s = 0.5 + np.tan(2.0 * epsilon * t_arr * r / big_n - math.atan(r)) / (2.0 * r)
    f = 1.0 - s
    return float(f) if np.ndim(f) == 0 else f


@dataclass
class _StepTable:
    dt: float
    unitaries: np.ndarray  # (steps, 2, 2) exp(-i h dt) restricted to the search plane
    final: np.ndarray = field(repr=False)  # 2-vector after the full sweep


class AdiabaticEngine(Engine):
    """Interpolation ``H(t) = f(t)(I - |psi_n><psi_n|) + (1 - f(t))(I - |w><w|)``.

    ``H(t)`` acts as the identity outside ``span{|w>, |psi_n>}``, so each
    midpoint step ``exp(-i H(t + dt/2) dt)`` is computed exactly from the
    2x2 block in that plane plus a global phase on its complement. With
    ``dense=True`` each step instead exponentiates the full matrix.

    ``mode="ideal"`` replaces integration by the perfectly adiabatic
    propagator that maps each instantaneous eigenvector at 0 onto its
    continuation at ``t`` with the accumulated dynamical phase.
    """

    kind = "adiabatic"

    def __init__(
        self,
        n: int,
        w: int = 0,
        epsilon: float = 0.2,
        dt: float | None = None,
        mode: str = "integrate",
        dense: bool = False,
    ):
        super().__init__(n, w)
        if not 0.0 < epsilon < 1.0:
            raise PreconditionError("epsilon must lie in (0, 1)")
        if mode not in ("integrate", "ideal"):
            raise PreconditionError(f"unknown adiabatic mode {mode!r}")
        if dt is not None and not dt > 0:
            raise PreconditionError("dt must be positive")
        self.epsilon = float(epsilon)
        self.mode = mode
        self.dense = dense
        self._total = adiabatic_runtime(n, epsilon)

        target = basis_state(n, w)
        psi = self.initial_state
        rest = psi - psi[w] * target
        rest /= np.linalg.norm(rest)
        self.plane = np.stack([target, rest], axis=1)  # (N, 2) orthonormal
        self._psi_plane = self.plane.conj().T @ psi
        self._target_plane = np.array([1.0, 0.0], dtype=np.complex128)

        self._table: _StepTable | None = None
        if mode == "integrate":
            self._table = self._converged_table(dt)

    @property
    def run_time(self) -> float:
        return self._total

    @property
    def asymptotic_run_time(self) -> float:
        return asymptotic_adiabatic_runtime(self.n, self.epsilon)

    @property
    def dt(self) -> float | None:
        return None if self._table is None else self._table.dt

    @property
    def steps(self) -> int:
        return 0 if self._table is None else len(self._table.unitaries)

    def params(self) -> dict:
        return {**super().params(), "epsilon": self.epsilon, "dt": self.dt, "mode": self.mode}

    def schedule(self, t):
        return adiabatic_schedule(self.n, self.epsilon, np.clip(t, 0.0, self._total))

    def plane_hamiltonian(self, t: float) -> np.ndarray:
        f = self.schedule(t)
        p, q = self._psi_plane, self._target_plane
        return np.eye(2) - f * np.outer(p, p.conj()) - (1.0 - f) * np.outer(q, q.conj())

    def hamiltonian(self, t: float) -> np.ndarray:
        """Full ``2**n`` square matrix of ``H(t)``."""
        f = self.schedule(t)
        psi = self.initial_state
        target = basis_state(self.n, self.w)
        return (
            np.eye(self.dim)
            - f * np.outer(psi, psi.conj())
            - (1.0 - f) * np.outer(target, target)
        )

    def gap(self, t):
        """Spectral gap between ground and first excited level of ``H(t)``."""
        f = np.asarray(self.schedule(t))
        g = np.sqrt(1.0 - 4.0 * f * (1.0 - f) * (1.0 - 1.0 / self.dim))
        return float(g) if g.ndim == 0 else g

    def minimum_gap(self) -> tuple[float, float]:
        """``(t_min, gap_min)`` from a bounded scalar minimisation of :meth:`gap`."""
        res = optimize.minimize_scalar(
            self.gap, bounds=(0.0, self._total), method="bounded", options={"xatol": 1e-10}
        )
        return float(res.x), float(res.fun)

    def ground_state(self, t: float) -> np.ndarray:
        _, vecs = herm_eig(self.plane_hamiltonian(t))
        return self.plane @ vecs[:, 0]

    def ground_state_overlaps(self, times) -> np.ndarray:
        times = self.check_times(times)
        states = self.states(times)
        return np.array(
            [abs(np.vdot(self.ground_state(t), s)) ** 2 for t, s in zip(times, states)]
        )

    # -- integration -------------------------------------------------------

    def _plane_step(self, t_mid: float, dt: float) -> np.ndarray:
        return matexp_unitary(self.plane_hamiltonian(t_mid), dt)

    def _build_table(self, steps: int) -> _StepTable:
        dt = self._total / steps
        mids = (np.arange(steps) + 0.5) * dt
        f = self.schedule(mids)[:, None, None]
        p, q = self._psi_plane, self._target_plane
        h = np.eye(2) - f * np.outer(p, p.conj()) - (1.0 - f) * np.outer(q, q.conj())
        # batched form of matexp_unitary on the 2x2 plane blocks
        evals, evecs = np.linalg.eigh(h)
        unitaries = np.einsum("sij,sj,skj->sik", evecs, np.exp(-1j * evals * dt), evecs.conj())
        c = self._psi_plane.copy()
        for u in unitaries:
            c = u @ c
        return _StepTable(dt, unitaries, c)

    def _converged_table(self, dt: float | None) -> _StepTable:
        if dt is not None:
            steps = max(1, int(round(self._total / dt)))
            table, finer = self._build_table(steps), self._build_table(2 * steps)
            err = np.linalg.norm(table.final - finer.final)
            if err >= CONVERGENCE_TOL:
                raise IntegrationStepError(
                    f"dt={dt:g}: halving the step moves the final state by {err:.2e} "
                    f"(>= {CONVERGENCE_TOL:g}); use a smaller dt"
                )
            return table
        steps = DEFAULT_ADIABATIC_STEPS
        table = self._build_table(steps)
        for _ in range(MAX_REFINEMENTS):
            finer = self._build_table(2 * steps)
            if np.linalg.norm(table.final - finer.final) < CONVERGENCE_TOL:
                return table
            table, steps = finer, 2 * steps
        raise IntegrationStepError(
            f"no convergence after {MAX_REFINEMENTS} step halvings; use a smaller dt"
        )

    def _apply_step(self, u2: np.ndarray, dt: float, v: np.ndarray, t_mid: float) -> np.ndarray:
        if self.dense:
            return matexp_unitary(self.hamiltonian(t_mid), dt) @ v
        # exp(-iH dt) = e^{-i dt} I + P (u2 - e^{-i dt} I_2) P^dagger on the plane
        phase = np.exp(-1j * dt)
        coeffs = self.plane.conj().T @ v
        return phase * v + self.plane @ ((u2 - phase * np.eye(2)) @ coeffs)

    def _integrate(self, v: np.ndarray, times: np.ndarray) -> np.ndarray:
        table = self._table
        dt = table.dt
        steps = len(table.unitaries)
        out = np.empty((len(times),) + v.shape, dtype=np.complex128)
        order = np.argsort(times, kind="stable")
        j = 0
        for idx in order:
            t = min(times[idx], self._total)
            # snap to the step grid when within rounding of a grid point
            target = t / dt
            j_t = int(math.floor(target + 1e-9))
            j_t = min(j_t, steps)
            while j < j_t:
                v = self._apply_step(table.unitaries[j], dt, v, (j + 0.5) * dt)
                j += 1
            rem = t - j * dt
            if rem > 1e-9 * dt:
                t_mid = j * dt + 0.5 * rem
                out[idx] = self._apply_step(self._plane_step(t_mid, rem), rem, v, t_mid)
            else:
                out[idx] = v
        return out

    # -- ideal adiabatic propagator ----------------------------------------

    def _plane_frame(self, t: float) -> np.ndarray:
        """Eigenvectors of the plane Hamiltonian as columns (ground first), continuous in t."""
        h = self.plane_hamiltonian(t).real
        m = np.eye(2) - h
        # m = m0 I + b (cos chi Z + sin chi X); off-diagonal stays >= 0 so chi is continuous
        chi = math.atan2(2.0 * m[0, 1], m[0, 0] - m[1, 1])
        c, s = math.cos(chi / 2), math.sin(chi / 2)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)

    def _ideal_phases(self, t: float) -> np.ndarray:
        g_int, _ = integrate.quad(self.gap, 0.0, t, limit=200, epsabs=1e-13, epsrel=1e-12)
        # levels (1 - g)/2 and (1 + g)/2
        return np.exp(-1j * np.array([0.5 * t - 0.5 * g_int, 0.5 * t + 0.5 * g_int]))

    def _ideal(self, v: np.ndarray, times: np.ndarray) -> np.ndarray:
        out = np.empty((len(times),) + v.shape, dtype=np.complex128)
        frame0 = self._plane_frame(0.0)
        coeffs = self.plane.conj().T @ v
        rest = v - self.plane @ coeffs
        for i, t in enumerate(times):
            t = min(t, self._total)
            frame_t = self._plane_frame(t)
            u2 = frame_t @ np.diag(self._ideal_phases(t)) @ frame0.conj().T
            out[i] = np.exp(-1j * t) * rest + self.plane @ (u2 @ coeffs)
        return out

    def evolve(self, vectors, times) -> np.ndarray:
        times = self.check_times(times)
        if np.any(times > self._total * (1 + 1e-12)):
            raise PreconditionError(f"adiabatic times must lie in [0, {self._total}]")
        v = np.array(vectors, dtype=np.complex128)
        if self.mode == "ideal":
            return self._ideal(v, times)
        return self._integrate(v, times)


def make_engine(kind: str, n: int, w: int = 0, *, energy: float = 1.0,
                epsilon: float = 0.2, dt: float | None = None,
                k_max: int | None = None) -> Engine:
    if kind == "circuit":
        return CircuitEngine(n, w, k_max=k_max)
    if kind == "analog":
        return AnalogEngine(n, w, energy=energy)
    if kind == "adiabatic":
        return AdiabaticEngine(n, w, epsilon=epsilon, dt=dt)
    raise PreconditionError(f"unknown engine kind {kind!r}; expected one of {ENGINE_KINDS}")


def circuit_trajectory(n: int, w: int, k_max: int) -> Trajectory:
    engine = CircuitEngine(n, w, k_max=k_max)
    return engine.trajectory(np.arange(k_max + 1))


def analog_trajectory(n: int, w: int, energy: float, t_grid) -> Trajectory:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise PreconditionError("t_grid must be ascending and start at 0")
    return AnalogEngine(n, w, energy=energy).trajectory(t_grid)


def adiabatic_trajectory(n: int, w: int, epsilon: float = 0.2, dt: float | None = None,
                         t_grid=None) -> Trajectory:
    """Integrated adiabatic run, sampled at ``t_grid`` (default: 2001 even points)."""
    engine = AdiabaticEngine(n, w, epsilon=epsilon, dt=dt)
    if t_grid is None:
        t_grid = np.linspace(0.0, engine.run_time, DERIVATIVE_DIVISIONS + 1)
    return engine.trajectory(t_grid)
