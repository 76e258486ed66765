import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import random_density, random_hermitian
from infoflux.errors import PreconditionError, SizeError
from infoflux.qla import (dagger, herm_eig, is_hermitian, is_unitary, kron, matexp_unitary,
                          partial_trace, qubit_count_of, trace_norm_hermitian)

seeds = st.integers(0, 2**32 - 1)


def test_qubit_count_of():
    assert qubit_count_of(1) == 0
    assert qubit_count_of(256) == 8
    with pytest.raises(PreconditionError):
        qubit_count_of(6)


def test_kron_dimensions_and_values():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    b = np.eye(2)
    out = kron(a, b)
    assert out.shape == (4, 4)
    assert out[2, 0] == 3 and out[3, 1] == 3 and out[2, 1] == 0


def test_kron_size_cap(monkeypatch):
    monkeypatch.setenv("INFOFLUX_MAX_QUBITS", "3")
    with pytest.raises(SizeError):
        kron(np.eye(4), np.eye(4))


def test_partial_trace_of_product(rng):
    a, b = random_density(rng, 2), random_density(rng, 4)
    rho = np.kron(a, b)
    assert np.allclose(partial_trace(rho, 3, [0]), a, atol=1e-12)
    assert np.allclose(partial_trace(rho, 3, [1, 2]), b, atol=1e-12)


def test_partial_trace_qubit_order(rng):
    # qubit 0 is the most significant; kept qubits come out ascending
    a, b, c = (random_density(rng, 2) for _ in range(3))
    rho = np.kron(np.kron(a, b), c)
    assert np.allclose(partial_trace(rho, 3, [2, 0]), np.kron(a, c), atol=1e-12)
    assert np.allclose(partial_trace(rho, 3, [1]), b, atol=1e-12)


def test_partial_trace_rejects_bad_keep(rng):
    with pytest.raises(PreconditionError):
        partial_trace(random_density(rng, 4), 2, [2])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_partial_trace_preserves_trace_and_positivity(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2**n)
    keep = sorted(rng.choice(n, size=rng.integers(1, n), replace=False).tolist())
    red = partial_trace(rho, n, keep)
    assert abs(np.trace(red) - 1) < 1e-12
    assert is_hermitian(red)
    assert np.linalg.eigvalsh(red).min() > -1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_partial_trace_linear(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 8), random_density(rng, 8)
    x = rng.uniform()
    lhs = partial_trace(x * a + (1 - x) * b, 3, [1])
    rhs = x * partial_trace(a, 3, [1]) + (1 - x) * partial_trace(b, 3, [1])
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 6))
def test_herm_eig_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 2**n)
    lam, v = herm_eig(h)
    assert np.all(np.diff(lam) >= -1e-12)
    assert np.allclose(v @ np.diag(lam) @ dagger(v), h, atol=1e-9)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(PreconditionError):
        herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-50, 50))
def test_matexp_matches_scipy_and_is_unitary(seed, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 16)
    u = matexp_unitary(h, t)
    assert is_unitary(u)
    assert np.allclose(u, expm(-1j * t * h), atol=1e-9)


def test_trace_norm_of_pure_difference():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    assert abs(trace_norm_hermitian(a - b) - 2.0) < 1e-14


def test_is_unitary_rejects_scaled_identity():
    assert not is_unitary(1.01 * np.eye(3))
