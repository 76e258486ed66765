"""State preparation on qubit registers.

Pure states are 1-D ``complex128`` amplitude vectors of length ``2**n``;
density matrices are the corresponding square arrays.
"""

from __future__ import annotations

import numpy as np

from .constants import NORMALIZATION_TOL, max_qubits
from .errors import PreconditionError, SizeError
from .qla import as_operator

__all__ = [
    "MAX_GRAM_SCHMIDT_ATTEMPTS",
    "basis_state",
    "density_of",
    "haar_orthogonal_pair_multiqubit",
    "haar_orthogonal_qubit_pair",
    "is_normalized",
    "pair_rng",
    "purity",
    "sample_orthogonal_pairs",
    "uniform_superposition",
]

MAX_GRAM_SCHMIDT_ATTEMPTS = 10
MAX_SUBSYSTEM_QUBITS = 4


def _check_register(n: int) -> None:
    if not 1 <= n <= max_qubits():
        raise SizeError(f"qubit count {n} outside [1, {max_qubits()}]")


def is_normalized(psi, tol: float = NORMALIZATION_TOL) -> bool:
    psi = np.asarray(psi)
    return bool(abs(np.vdot(psi, psi).real - 1.0) <= tol)


def basis_state(n: int, index: int) -> np.ndarray:
    _check_register(n)
    if not 0 <= index < 2**n:
        raise PreconditionError(f"basis index {index} outside [0, {2**n})")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def uniform_superposition(n: int) -> np.ndarray:
    """``|+>^n``: every amplitude equals ``2**(-n/2)``."""
    _check_register(n)
    return np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128)


def density_of(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def purity(rho) -> float:
    rho = as_operator(rho)
    # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def haar_orthogonal_qubit_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Haar-random qubit ``|psi>`` and its orthogonal partner.

    ``cos(theta)`` is drawn uniformly on ``[-1, 1]`` and ``phi`` uniformly on
    ``[0, 2 pi)``, which is the uniform measure on the Bloch sphere.
    """
    cos_theta = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    half = 0.5 * np.arccos(cos_theta)
    phase = np.exp(1j * phi)
    psi = np.array([np.cos(half), phase * np.sin(half)], dtype=np.complex128)
    perp = np.array([np.sin(half), -phase * np.cos(half)], dtype=np.complex128)
    return psi, perp


def _complex_gaussian(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)


def haar_orthogonal_pair_multiqubit(
    n_s: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Haar-random ``n_s``-qubit state and a uniformly random orthogonal partner.

    The first state is a normalised complex Gaussian vector. The partner is a
    second Gaussian draw projected onto the orthogonal complement of the
    first; a numerically degenerate projection is redrawn.
    """
    if not 1 <= n_s <= MAX_SUBSYSTEM_QUBITS:
        raise PreconditionError(f"subsystem size {n_s} outside [1, {MAX_SUBSYSTEM_QUBITS}]")
    dim = 2**n_s
    psi = _complex_gaussian(rng, dim)
    psi /= np.linalg.norm(psi)
    for _ in range(MAX_GRAM_SCHMIDT_ATTEMPTS):
        perp = _complex_gaussian(rng, dim)
        perp -= np.vdot(psi, perp) * psi
        norm = np.linalg.norm(perp)
        if norm > 1e-8:
            perp /= norm
            # second pass removes the residue left by cancellation
            perp -= np.vdot(psi, perp) * psi
            return psi, perp / np.linalg.norm(perp)
    raise RuntimeError("Gram-Schmidt kept producing a vector parallel to the first draw")


def pair_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_orthogonal_pairs(n_s: int, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack ``count`` orthogonal pairs, sample ``j`` drawn from ``pair_rng(seed, j)``.

    Because each sample owns its stream, asking for more samples extends
    the set without changing the first ``count`` entries.

    Returns
    -------
    psi, perp : ndarray, shape (count, 2**n_s)
    """
    if count < 1:
        raise PreconditionError("sample count must be at least 1")
    draw = haar_orthogonal_qubit_pair if n_s == 1 else None
    dim = 2**n_s
    psi = np.empty((count, dim), dtype=np.complex128)
    perp = np.empty((count, dim), dtype=np.complex128)
    for j in range(count):
        rng = pair_rng(seed, j)
        a, b = draw(rng) if draw else haar_orthogonal_pair_multiqubit(n_s, rng)
        psi[j] = a
        perp[j] = b
    return psi, perp
