from __future__ import annotations

import numpy as np
import pytest
from conftest import random_hermitian

from pointerstates.effective import magnus_first_order
from pointerstates.errors import (
    BadP,
    BasisNotOrthonormal,
    CycleNotClosed,
    MissingErrorEntry,
    NotNormalized,
    RNotInvolution,
    UnknownName,
)
from pointerstates.linalg import I2, SX, SY, SZ, evolve_propagator, tensor
from pointerstates.pulses import (
    SWAP,
    PulseErrorModel,
    apply_pulse_errors,
    closure_defect,
    cycle_product,
    desymmetrize,
    epr_cycle,
    epr_pointer_basis,
    epr_pulse,
    named_qubit_cycle,
    pauli_error,
    reflection_Q,
    sigma_pulse,
    uhrig_cycle,
    uhrig_intervals,
    uhrig_times,
    uniform_cycle,
)

S3 = np.sqrt(3)
U_E2_DISPLAYED = np.array(
    [
        [(1 + 1j * S3) / 4, 0, 0, (-3 + 1j * S3) / 4],
        [0, (1 - 1j * S3) / 4, (3 + 1j * S3) / 4, 0],
        [0, (3 + 1j * S3) / 4, (1 - 1j * S3) / 4, 0],
        [(-3 + 1j * S3) / 4, 0, 0, (1 + 1j * S3) / 4],
    ]
)
# Unitary form of the displayed E3 matrix: the displayed (1,4) entry carries
# the wrong sign (the matrix as printed is not unitary); all other entries
# and the exponential form agree with this one.
U_E3_UNITARY = np.array(
    [
        [(1j - 1) / 2, 0, 0, (-1j - 1) / 2],
        [0, (1 - 1j) / 2, (1j + 1) / 2, 0],
        [0, (1j + 1) / 2, (1 - 1j) / 2, 0],
        [(-1j - 1) / 2, 0, 0, (1j - 1) / 2],
    ]
)


def _equal_up_to_phase(A, B, tol=1e-9):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    ph = A[k] / B[k]
    return abs(abs(ph) - 1) < tol and np.abs(A - ph * B).max() < tol


def test_reflection_examples():
    assert np.allclose(reflection_Q([1, 0], 2), SZ)
    assert np.allclose(reflection_Q(np.array([1, 1]) / np.sqrt(2), 2), SX)
    assert np.allclose(reflection_Q([1, 0, 0, 0], 4), np.diag([1, -1, -1, -1]))
    with pytest.raises(NotNormalized):
        reflection_Q([1, 1], 2)


def test_reflection_properties(g):
    v = g.normal(size=5) + 1j * g.normal(size=5)
    v /= np.linalg.norm(v)
    Q = reflection_Q(v, 5)
    assert np.allclose(Q, Q.conj().T) and np.allclose(Q @ Q, np.eye(5))
    assert np.allclose(Q @ v, v)
    w = g.normal(size=5) + 1j * g.normal(size=5)
    w -= np.vdot(v, w) * v
    assert np.allclose(Q @ w, -w)


def test_sigma_pulse_examples():
    assert np.allclose(sigma_pulse(2, 1), np.diag([-1, 1]))
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(sigma_pulse(4, 2), np.diag([w, w**2, 1, 1]))
    basis, p = epr_pointer_basis("E3")
    assert _equal_up_to_phase(sigma_pulse(4, p - 1, basis), epr_pulse("E3"))
    basis, p = epr_pointer_basis("E2")
    assert _equal_up_to_phase(sigma_pulse(4, p, basis), epr_pulse("E2"))


def test_sigma_pulse_order_and_errors():
    for D, p in [(3, 1), (3, 2), (5, 3)]:
        P = sigma_pulse(D, p)
        assert np.abs(np.linalg.matrix_power(P, p + 1) - np.eye(D)).max() < 1e-14
    with pytest.raises(BadP):
        sigma_pulse(4, 4)
    with pytest.raises(BadP):
        sigma_pulse(4, 0)
    with pytest.raises(BasisNotOrthonormal):
        sigma_pulse(2, 1, [[1, 0], [1, 0]])


def test_uniform_cycle_examples():
    zz = uniform_cycle(SZ, 2, 0.1)
    assert zz.T_c == pytest.approx(0.2) and len(zz.segments) == 2
    e3 = uniform_cycle(sigma_pulse(4, 3, epr_pointer_basis("E3")[0]), 4, 0.1)
    assert closure_defect(e3) < 1e-12
    with pytest.raises(CycleNotClosed):
        uniform_cycle(SX, 3, 0.1)


def test_named_cycles():
    zz = named_qubit_cycle("ZZ", 0.1)
    assert np.allclose(cycle_product(zz), np.eye(2))
    xyxy = named_qubit_cycle("XYXY", 0.1)
    assert np.allclose(cycle_product(xyxy), -np.eye(2))
    assert xyxy.T_c == pytest.approx(0.4)
    xzxz = named_qubit_cycle("XZXZ", 0.1)
    assert xzxz.T_c == pytest.approx(0.4)
    with pytest.raises(UnknownName):
        named_qubit_cycle("XX", 0.1)


def test_xzxz_twirls_out_system_bath(g):
    Bs = [random_hermitian(g, 4) for _ in range(3)]
    H = sum(tensor(s, B) for s, B in zip((SX, SY, SZ), Bs))
    M = magnus_first_order(named_qubit_cycle("XZXZ", 0.01), H)
    assert np.abs(M).max() < 1e-12


def test_epr_pulses_match_displayed_matrices():
    E1 = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(epr_pulse("E1"), E1) and np.allclose(SWAP, E1)
    assert np.abs(epr_pulse("E2") - U_E2_DISPLAYED).max() < 1e-9
    assert epr_pulse("E2")[0, 0] == pytest.approx((1 + 1j * S3) / 4)
    assert np.abs(epr_pulse("E3") - U_E3_UNITARY).max() < 1e-9


@pytest.mark.parametrize("which,n", [("E1", 2), ("E2", 3), ("E3", 4)])
def test_epr_cycles_close(which, n):
    seq = epr_cycle(which, 0.01)
    assert len(seq.segments) == n
    M = np.linalg.matrix_power(epr_pulse(which), n)
    assert _equal_up_to_phase(M, np.eye(4))


def test_epr_unknown():
    with pytest.raises(UnknownName):
        epr_cycle("E4", 0.1)


def test_desymmetrize_construction():
    R = np.eye(3)[[1, 0, 2]].astype(complex)
    base = uniform_cycle(sigma_pulse(3, 1), 2, 0.2)
    ds = desymmetrize(base, R)
    assert len(ds.segments) == 4
    assert ds.T_c == pytest.approx(base.T_c)
    assert np.allclose(ds.segments[0].P, R)
    assert np.allclose(ds.segments[1].P, sigma_pulse(3, 1) @ R)
    assert closure_defect(ds) < 1e-12
    zz = desymmetrize(named_qubit_cycle("ZZ", 0.1), SX)
    assert closure_defect(zz) < 1e-12
    with pytest.raises(RNotInvolution):
        desymmetrize(base, sigma_pulse(3, 2))


def test_desymmetrize_first_order(g):
    P = sigma_pulse(4, 2)
    R = np.eye(4)[[0, 3, 2, 1]].astype(complex)
    n = 3
    H = random_hermitian(g, 4 * 3)
    ds = desymmetrize(uniform_cycle(P, n, 0.05), R)
    Rl, Pl = np.kron(R, np.eye(3)), np.kron(P, np.eye(3))
    expect = np.zeros_like(H)
    for k in range(n):
        Pk = np.linalg.matrix_power(Pl, k)
        expect += Pk.conj().T @ (Rl @ H @ Rl + H) @ Pk
    expect /= 2 * n
    assert np.abs(magnus_first_order(ds, H) - expect).max() < 1e-12


def test_uhrig_examples():
    assert np.allclose(uhrig_times(1, 2.0), [1.0])
    assert np.allclose(uhrig_times(2, 1.0), [0.25, 0.75])
    iv = uhrig_intervals(5, 1.7)
    assert iv.sum() == pytest.approx(1.7) and np.all(iv > 0)


def test_uhrig_cycles_close():
    for n in (1, 2, 3, 4):
        seq = uhrig_cycle(SZ, n, 1.0)
        assert seq.T_c == pytest.approx(1.0)
        assert closure_defect(seq) < 1e-12


def test_pulse_errors():
    zz = named_qubit_cycle("ZZ", 0.1)
    same = apply_pulse_errors(zz, PulseErrorModel({"Z": np.zeros((2, 2))}))
    assert all(np.allclose(a.P, b.P) for a, b in zip(same.segments, zz.segments))
    assert not same.ideal
    E = pauli_error(0.05, (0.3, -0.2, 0.9))
    em = PulseErrorModel({"Z": E})
    assert em.eps_err == pytest.approx(np.linalg.norm(E, 2))
    bad = apply_pulse_errors(zz, em)
    U = SZ @ evolve_propagator(E, 1.0)
    assert all(np.allclose(s.P, U) for s in bad.segments)
    with pytest.raises(MissingErrorEntry):
        apply_pulse_errors(named_qubit_cycle("XYXY", 0.1), PulseErrorModel({"X": E}))


def test_free_segments_skip_errors():
    seq = uhrig_cycle(SZ, 2, 1.0)
    out = apply_pulse_errors(seq, PulseErrorModel({"P": pauli_error(0.1, (1, 0, 0))}))
    assert np.allclose(out.segments[-1].P, I2)
