"""Reduced dynamical map of an ``n_S``-qubit subsystem under an engine.

The subsystem starts in an arbitrary state ``rho`` and the remaining qubits
in ``|+>^(n - n_S)``; the map at time ``t`` is

    Lambda_t(rho) = tr_env U(t) (rho (x) |+><+|^(n-n_S)) U(t)^dagger.

It is linear in ``rho``, so one snapshot stores the images of a Hermitian
operator basis and every later evaluation is a small linear combination.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import TRACE_TOL
from .errors import PreconditionError
from .qla import partial_trace
from .qstate import uniform_superposition

__all__ = [
    "ChannelSnapshot",
    "apply",
    "apply_many",
    "channel_at",
    "channels_at",
    "hermitian_unit_basis",
    "pauli_basis",
    "unit_images",
]

_PAULIS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@lru_cache(maxsize=None)
def pauli_basis(n_s: int) -> np.ndarray:
    """Tensor products of I, X, Y, Z scaled to unit Hilbert-Schmidt norm."""
    dim = 2**n_s
    ops = []
    for labels in itertools.product(range(4), repeat=n_s):
        op = np.ones((1, 1), dtype=np.complex128)
        for k in labels:
            op = np.kron(op, _PAULIS[k])
        ops.append(op / np.sqrt(dim))
    basis = np.array(ops)
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=None)
def hermitian_unit_basis(n_s: int) -> np.ndarray:
    """Orthonormal Hermitian basis built from matrix units.

    Diagonal units ``E_ii``, symmetric ``(E_ij + E_ji)/sqrt 2`` and
    antisymmetric ``-i(E_ij - E_ji)/sqrt 2`` for ``i < j``.
    """
    dim = 2**n_s
    ops = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=np.complex128)
        e[i, i] = 1.0
        ops.append(e)
    for i, j in itertools.combinations(range(dim), 2):
        sym = np.zeros((dim, dim), dtype=np.complex128)
        sym[i, j] = sym[j, i] = 1 / np.sqrt(2)
        anti = np.zeros((dim, dim), dtype=np.complex128)
        anti[i, j], anti[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
        ops.extend([sym, anti])
    basis = np.array(ops)
    basis.setflags(write=False)
    return basis


_BASES = {"pauli": pauli_basis, "units": hermitian_unit_basis}


@dataclass(frozen=True)
class ChannelSnapshot:
    """Action of the reduced map at one time on an orthonormal Hermitian basis."""

    n_s: int
    t: float
    basis: np.ndarray  # (4**n_s, d, d)
    basis_images: np.ndarray  # (4**n_s, d, d)

    @property
    def dim(self) -> int:
        return 2**self.n_s

    def coefficients(self, rho) -> np.ndarray:
        """Real expansion coefficients ``tr(B_k rho)`` (last two axes are the matrix)."""
        rho = np.asarray(rho, dtype=np.complex128)
        return np.einsum("kij,...ji->...k", self.basis, rho).real

    def transfer_matrix(self) -> np.ndarray:
        """Real matrix ``R[k, l] = tr(B_k Lambda(B_l))`` of the map in the basis."""
        return np.einsum("kij,lji->kl", self.basis, self.basis_images).real


def _environment_columns(n: int, n_s: int, keep: list[int]) -> np.ndarray:
    """Columns ``|i>_keep (x) |+>_rest`` laid out on the global register."""
    env = uniform_superposition(n - n_s) if n > n_s else np.ones(1, dtype=np.complex128)
    cols = np.kron(np.eye(2**n_s, dtype=np.complex128), env[:, None])  # subsystem first
    rest = [q for q in range(n) if q not in keep]
    order = keep + rest  # axis a of cols tensor is global qubit order[a]
    tensor = cols.reshape((2,) * n + (2**n_s,))
    inverse = np.argsort(order)
    return tensor.transpose(list(inverse) + [n]).reshape(2**n, 2**n_s)


def _reduce_columns(evolved: np.ndarray, n: int, n_s: int, keep: list[int]) -> np.ndarray:
    """``tr_env |v_i><v_j|`` for the evolved columns; shape (d, d, d, d) as [i, j, a, b]."""
    rest = [q for q in range(n) if q not in keep]
    tensor = evolved.reshape((2,) * n + (evolved.shape[-1],))
    tensor = tensor.transpose(keep + rest + [n]).reshape(2**n_s, 2 ** (n - n_s), -1)
    # image of |i><j| is A_i A_j^dagger with A_i = tensor[:, :, i]
    return np.einsum("aei,bej->ijab", tensor, tensor.conj())


def _check_subsystem(engine, n_s: int, keep) -> list[int]:
    n = engine.n
    if not 1 <= n_s <= n - 1:
        raise PreconditionError(f"subsystem size {n_s} must lie in [1, {n - 1}]")
    if keep is None:
        return list(range(n_s))
    keep = sorted(set(int(k) for k in keep))
    if len(keep) != n_s or any(not 0 <= k < n for k in keep):
        raise PreconditionError(f"keep={keep} must list {n_s} distinct qubits of {n}")
    return keep


def unit_images(engine, times, n_s: int, keep: Iterable[int] | None = None) -> np.ndarray:
    """Images of the matrix units ``|i><j|``, shape ``(len(times), d, d, d, d)``."""
    keep = _check_subsystem(engine, n_s, keep)
    cols = _environment_columns(engine.n, n_s, keep)
    evolved = engine.evolve(cols, times)
    return np.array([_reduce_columns(v, engine.n, n_s, keep) for v in evolved])


def channels_at(engine, times, n_s: int, keep: Iterable[int] | None = None,
                basis: str = "pauli") -> list[ChannelSnapshot]:
    """Snapshots at several times sharing one pass of the engine."""
    try:
        ops = _BASES[basis](n_s)
    except KeyError:
        raise PreconditionError(f"unknown operator basis {basis!r}") from None
    times = engine.check_times(times)
    units = unit_images(engine, times, n_s, keep)
    snaps = []
    for t, e in zip(times, units):
        images = np.einsum("kij,ijab->kab", ops, e)
        images.setflags(write=False)
        snaps.append(ChannelSnapshot(n_s=n_s, t=float(t), basis=ops, basis_images=images))
    return snaps


def channel_at(engine, t: float, n_s: int, keep: Iterable[int] | None = None,
               basis: str = "pauli") -> ChannelSnapshot:
    """Reduced map of the qubits ``keep`` (default: the first ``n_s``) at time ``t``."""
    return channels_at(engine, [t], n_s, keep=keep, basis=basis)[0]


def apply_many(snapshot: ChannelSnapshot, rhos) -> np.ndarray:
    """Apply the map to a stack of operators with trailing shape ``(d, d)``."""
    rhos = np.asarray(rhos, dtype=np.complex128)
    if rhos.shape[-2:] != (snapshot.dim, snapshot.dim):
        raise PreconditionError(
            f"operator shape {rhos.shape[-2:]} does not match subsystem dim {snapshot.dim}"
        )
    coeffs = snapshot.coefficients(rhos)
    return np.tensordot(coeffs, snapshot.basis_images, axes=([-1], [0]))


def apply(snapshot: ChannelSnapshot, rho) -> np.ndarray:
    """``Lambda_t(rho)`` for one density matrix of the subsystem."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2:
        raise PreconditionError("apply expects a single square matrix")
    return apply_many(snapshot, rho)


def direct_reduced_state(engine, t: float, rho, n_s: int,
                         keep: Iterable[int] | None = None) -> np.ndarray:
    """Independent path: evolve ``rho (x) |+><+|`` globally, then partial-trace.

    Used to cross-check snapshots; cost is one full ``2**n`` density-matrix
    evolution per call.
    """
    keep = _check_subsystem(engine, n_s, keep)
    n = engine.n
    rho = np.asarray(rho, dtype=np.complex128)
    env = uniform_superposition(n - n_s)
    global_in = np.kron(rho, np.outer(env, env.conj()))
    # place subsystem qubits at the `keep` positions
    rest = [q for q in range(n) if q not in keep]
    order = keep + rest
    inverse = list(np.argsort(order))
    tensor = global_in.reshape((2,) * (2 * n))
    tensor = tensor.transpose(inverse + [n + a for a in inverse])
    global_in = tensor.reshape(2**n, 2**n)
    u = engine.unitary(t)
    out = u @ global_in @ u.conj().T
    return partial_trace(out, n, keep)


def is_trace_preserving(snapshot: ChannelSnapshot, tol: float = TRACE_TOL) -> bool:
    tr_in = np.trace(snapshot.basis, axis1=1, axis2=2)
    tr_out = np.trace(snapshot.basis_images, axis1=1, axis2=2)
    return bool(np.max(np.abs(tr_in - tr_out)) <= tol)
