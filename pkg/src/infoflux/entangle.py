"""Entanglement of globally pure register states.

Both measures are built from marginal purities. For a pure state the
purity of a block ``A`` equals that of its complement, so the multipartite
sum over all ``2**n - 2`` nontrivial blocks is evaluated on one member of
each complementary pair and doubled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SizeError
from .qla import qubit_count_of
from .qstate import is_normalized

__all__ = [
    "EntanglementRecord",
    "MAX_MULTIPARTITE_QUBITS",
    "bipartite_concurrence",
    "entanglement_record",
    "marginal_purity",
    "multipartite_concurrence",
]

MAX_MULTIPARTITE_QUBITS = 10


@dataclass(frozen=True)
class EntanglementRecord:
    t: float
    c_bipartite: float
    e_multipartite: float


def _pure_register(psi) -> tuple[np.ndarray, int]:
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise PreconditionError("expected a state vector")
    n = qubit_count_of(psi.size)
    if not is_normalized(psi):
        raise PreconditionError("state vector is not normalised")
    return psi, n


def _schmidt_weights(psi: np.ndarray, n: int, block) -> np.ndarray:
    block = sorted(block)
    rest = [q for q in range(n) if q not in block]
    m = psi.reshape((2,) * n).transpose(block + rest).reshape(2 ** len(block), -1)
    return np.linalg.svd(m, compute_uv=False) ** 2


def _linear_entropy(weights: np.ndarray) -> float:
    # 1 - sum(l^2) == 2 sum_{i<j} l_i l_j for normalised weights; the pairwise
    # form has no cancellation, so near-product states give ~0 rather than ~1e-8
    tail = np.cumsum(weights[::-1])[::-1]
    return float(2.0 * np.sum(weights[:-1] * tail[1:]))


def marginal_purity(psi, block) -> float:
    """``tr(rho_A^2)`` of the qubits in ``block`` for the pure state ``psi``."""
    psi = np.asarray(psi, dtype=np.complex128)
    n = qubit_count_of(psi.size)
    return float(np.sum(_schmidt_weights(psi, n, block) ** 2))


def bipartite_concurrence(psi, qubit: int = 0) -> float:
    """Pure-state concurrence ``sqrt(2 (1 - tr rho_1^2))`` across ``qubit : rest``."""
    psi, n = _pure_register(psi)
    if n < 2:
        raise PreconditionError("a bipartition needs at least two qubits")
    return math.sqrt(2.0 * _linear_entropy(_schmidt_weights(psi, n, [qubit])))


def multipartite_concurrence(psi) -> float:
    """``2**(1 - n/2) sqrt((2**n - 2) - sum_A tr rho_A^2)`` over nontrivial blocks ``A``."""
    psi, n = _pure_register(psi)
    if n > MAX_MULTIPARTITE_QUBITS:
        raise SizeError(f"{n} qubits exceeds the {MAX_MULTIPARTITE_QUBITS}-qubit limit "
                        "of the exponential marginal sum")
    if n < 2:
        raise PreconditionError("multipartite concurrence needs at least two qubits")
    # (2**n - 2) - sum tr rho_A^2 == sum over blocks of (1 - tr rho_A^2); blocks holding
    # qubit 0 (full register excluded) pair off with their complements
    deficit = 0.0
    for size in range(0, n - 1):
        for others in itertools.combinations(range(1, n), size):
            deficit += 2.0 * _linear_entropy(_schmidt_weights(psi, n, (0,) + others))
    return 2.0 ** (1.0 - n / 2.0) * math.sqrt(deficit)


def entanglement_record(t: float, psi) -> EntanglementRecord:
    return EntanglementRecord(float(t), bipartite_concurrence(psi), multipartite_concurrence(psi))
