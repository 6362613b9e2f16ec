from __future__ import annotations

import numpy as np
import pytest
from conftest import random_density, random_hermitian

from pointerstates.errors import (
    BranchAmbiguity,
    DimensionMismatch,
    NonHermitianInput,
    NotPureInitial,
)
from pointerstates.linalg import (
    I2,
    SX,
    SY,
    SZ,
    evolve_propagator,
    is_unitary,
    partial_trace_bath,
    principal_log_hamiltonian,
    spectral,
    state_metrics,
    tensor,
)


def test_tensor_examples():
    assert np.allclose(tensor(I2, I2), np.eye(4))
    assert np.allclose(tensor(SZ, SZ), np.diag([1, -1, -1, 1]))
    assert np.allclose(tensor(SX, I2) @ tensor(I2, SX), tensor(SX, SX))


def test_tensor_mixed_product(g):
    A, B, C, D = (random_hermitian(g, 3) for _ in range(4))
    assert np.allclose(tensor(A, B) @ tensor(C, D), tensor(A @ C, B @ D))


def test_spectral_examples():
    sd = spectral(SZ)
    assert np.allclose(sd.eigenvalues, [-1, 1])
    assert sd.operator_norm == pytest.approx(1.0)
    assert np.allclose(spectral(np.zeros((4, 4))).eigenvalues, 0)
    heis = sum(tensor(s, s) for s in (SX, SY, SZ)) / 4
    assert np.allclose(spectral(heis).eigenvalues, [-0.75, 0.25, 0.25, 0.25])


def test_spectral_gauge_and_reconstruction(g):
    A = random_hermitian(g, 64, 3.0)
    sd = spectral(A)
    V = sd.eigenvectors
    assert np.all(np.diff(sd.eigenvalues) >= 0)
    assert np.abs(sd.reconstruct() - A).max() <= 1e-9 * np.linalg.norm(A, 2)
    assert sd.operator_norm == pytest.approx(np.abs(sd.eigenvalues).max())
    k = np.argmax(np.abs(V), axis=0)
    lead = V[k, np.arange(V.shape[1])]
    assert np.allclose(lead.imag, 0, atol=1e-12) and np.all(lead.real > 0)


def test_spectral_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        spectral(np.array([[0, 1], [0, 0]], dtype=complex))


def test_evolve_examples(g):
    assert np.allclose(evolve_propagator(SZ, np.pi / 2), np.diag([-1j, 1j]))
    assert np.allclose(evolve_propagator(random_hermitian(g, 5), 0.0), np.eye(5))
    assert np.allclose(evolve_propagator(SX, np.pi), -np.eye(2))
    assert is_unitary(evolve_propagator(random_hermitian(g, 16, 7.0), 1.3))


def test_principal_log_examples(g):
    assert np.allclose(principal_log_hamiltonian(np.eye(3), 1.0), 0)
    U = np.diag(np.exp([-0.3j, 0.3j]))
    assert np.allclose(principal_log_hamiltonian(U, 1.0), 0.3 * SZ)
    H = random_hermitian(g, 8, 0.5)
    assert np.abs(principal_log_hamiltonian(evolve_propagator(H, 1.0), 1.0) - H).max() < 1e-9


def test_principal_log_round_trip_near_branch(g):
    T = 2.0
    H = random_hermitian(g, 12, (np.pi - 1e-3) / T)
    Hr = principal_log_hamiltonian(evolve_propagator(H, T), T)
    assert np.linalg.norm(Hr - H, 2) <= 1e-8 * np.linalg.norm(H, 2)


def test_principal_log_branch_ambiguity():
    U = np.diag([np.exp(1j * (np.pi - 1e-8)), 1.0])
    with pytest.raises(BranchAmbiguity):
        principal_log_hamiltonian(U, 1.0)


def test_partial_trace_examples(g):
    rho = tensor(np.diag([1, 0]), np.eye(4) / 4)
    assert np.allclose(partial_trace_bath(rho, 2, 4), np.diag([1, 0]))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace_bath(np.outer(bell, bell), 2, 2), np.eye(2) / 2)
    rS, rB = random_density(g, 3), random_density(g, 5)
    assert np.allclose(partial_trace_bath(tensor(rS, rB), 3, 5), rS)
    with pytest.raises(DimensionMismatch):
        partial_trace_bath(rho, 3, 4)


def test_partial_trace_trace_preserving_and_positive(g):
    for _ in range(100):
        rho = random_density(g, 12)
        r = partial_trace_bath(rho, 3, 4)
        assert np.trace(r) == pytest.approx(1.0)
        assert np.linalg.eigvalsh(r).min() > -1e-12


def test_state_metrics_examples():
    r0 = np.diag([1.0, 0.0])
    assert state_metrics(r0, r0) == pytest.approx((1.0, 1.0))
    assert state_metrics(r0, np.eye(2) / 2) == pytest.approx((0.5, 0.5))
    assert state_metrics(r0, np.diag([0.0, 1.0])) == pytest.approx((0.0, 1.0))
    with pytest.raises(NotPureInitial):
        state_metrics(np.eye(2) / 2, r0)
