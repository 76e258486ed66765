"""Dense complex linear algebra on qubit registers.

Operators are plain ``numpy`` arrays of shape ``(dim, dim)``; the helpers
here add the validation and the qubit-ordering convention described in
:mod:`infoflux.constants`.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .constants import HERMITIAN_TOL, RECONSTRUCTION_TOL, UNITARY_TOL, max_dim
from .errors import PreconditionError, SizeError

__all__ = [
    "as_operator",
    "dagger",
    "herm_eig",
    "is_hermitian",
    "is_unitary",
    "kron",
    "matexp_unitary",
    "partial_trace",
    "qubit_count_of",
    "trace_norm_hermitian",
]


def as_operator(a) -> np.ndarray:
    """Return ``a`` as a square ``complex128`` array, validating its shape."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise PreconditionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def qubit_count_of(dim: int) -> int:
    q = int(dim).bit_length() - 1
    if dim < 1 or 2**q != dim:
        raise PreconditionError(f"dimension {dim} is not a power of two")
    return q


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(a, tol: float = UNITARY_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``a`` acting on the more significant qubits."""
    a = as_operator(a)
    b = as_operator(b)
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim():
        raise SizeError(f"kron result dimension {dim} exceeds the cap {max_dim()}")
    return np.kron(a, b)


def partial_trace(rho, qubit_count: int, keep: Iterable[int]) -> np.ndarray:
    """Reduce ``rho`` to the qubits listed in ``keep``.

    The kept qubits appear in the result in ascending index order, so
    ``keep={2, 0}`` and ``keep={0, 2}`` give the same matrix.

    Examples
    --------
    >>> bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    >>> partial_trace(np.outer(bell, bell), 2, {0}).real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    rho = as_operator(rho)
    if rho.shape[0] != 2**qubit_count:
        raise PreconditionError(
            f"matrix of dim {rho.shape[0]} does not hold {qubit_count} qubits"
        )
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise PreconditionError("keep must name at least one qubit")
    for k in keep:
        if not 0 <= k < qubit_count:
            raise PreconditionError(f"qubit index {k} outside [0, {qubit_count})")
    traced = [q for q in range(qubit_count) if q not in keep]
    if not traced:
        return rho.copy()

    # row axes 0..n-1, column axes n..2n-1; qubit 0 is the leading axis
    tensor = rho.reshape((2,) * (2 * qubit_count))
    perm = keep + traced + [qubit_count + q for q in keep] + [qubit_count + q for q in traced]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    tensor = tensor.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", tensor)


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""
    h = as_operator(h)
    if not is_hermitian(h):
        raise PreconditionError("herm_eig requires a Hermitian matrix")
    # symmetrise away the sub-tolerance anti-Hermitian residue before LAPACK
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    dim = h.shape[0]
    recon = (evecs * evals) @ evecs.conj().T
    if np.linalg.norm(recon - h) > RECONSTRUCTION_TOL * dim + 1e-12 * np.linalg.norm(h):
        raise PreconditionError("eigendecomposition failed to reconstruct the input")
    return evals, evecs


def matexp_unitary(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    evals, evecs = herm_eig(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def trace_norm_hermitian(a) -> float:
    """Trace norm of a Hermitian matrix: the sum of absolute eigenvalues."""
    a = as_operator(a)
    if not is_hermitian(a):
        raise PreconditionError("trace_norm_hermitian requires a Hermitian matrix")
    evals = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    return float(np.sum(np.abs(evals)))
