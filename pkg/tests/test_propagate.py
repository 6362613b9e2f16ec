from __future__ import annotations

import numpy as np
import pytest
from conftest import random_hermitian, random_unitary

from pointerstates.errors import DimensionMismatch, EmptyTrajectory, InvalidDensity
from pointerstates.linalg import I2, SX, SZ, evolve_propagator, partial_trace_bath, tensor
from pointerstates.model import SpinBathModel, build_H0, initial_state
from pointerstates.propagate import (
    Trajectory,
    cycle_propagator,
    misprepared_asymptotics,
    misprepared_exact_loss,
    misprepared_state,
    run_stroboscopic,
    trajectory_stats,
)
from pointerstates.pulses import (
    PulseSequence,
    Segment,
    epr_cycle,
    named_qubit_cycle,
    sigma_pulse,
    uniform_cycle,
)


def _equal_up_to_phase(A, B, tol=1e-12):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    return np.abs(A - (A[k] / B[k]) * B).max() < tol


def test_free_segment_is_plain_exponential(g):
    H = random_hermitian(g, 8)
    seq = PulseSequence((Segment(0.3, np.eye(2, dtype=complex), None),))
    assert np.allclose(cycle_propagator(seq, H), evolve_propagator(H, 0.3))


def test_zero_hamiltonian_gives_identity():
    for seq in (named_qubit_cycle("XYXY", 0.1), epr_cycle("E2", 0.1)):
        d = seq.dim_S * 4
        assert _equal_up_to_phase(cycle_propagator(seq, np.zeros((d, d))), np.eye(d))


def test_zz_three_factor_product(g):
    B = random_hermitian(g, 4)
    H = tensor(SX, B)
    tau = 0.37
    F = evolve_propagator(H, tau)
    Z = tensor(SZ, np.eye(4))
    assert np.allclose(cycle_propagator(named_qubit_cycle("ZZ", tau), H), Z @ F @ Z @ F)


def test_general_cycle_product(g):
    H = random_hermitian(g, 3 * 2)
    P = sigma_pulse(3, 2)
    seq = uniform_cycle(P, 3, 0.2)
    expect = np.eye(6, dtype=complex)
    for _ in range(3):
        expect = np.kron(P, I2) @ evolve_propagator(H, 0.2) @ expect
    assert _equal_up_to_phase(cycle_propagator(seq, H), expect)


def test_cycle_dimension_mismatch(g):
    with pytest.raises(DimensionMismatch):
        cycle_propagator(named_qubit_cycle("ZZ", 0.1), random_hermitian(g, 9))


def test_schedule_zero():
    m = SpinBathModel(1, 2, np.array([[0.5], [-0.3]]))
    U = cycle_propagator(named_qubit_cycle("ZZ", 0.1), build_H0(m))
    tr = run_stroboscopic(U, initial_state([1, 0], m), [0], (2, 4))
    assert tr.fidelity.tolist() == [1.0] and tr.purity.tolist() == [1.0]


def test_exact_fixed_point(g):
    phases = g.uniform(-np.pi, np.pi, 8)
    U = np.diag(np.exp(1j * phases))
    rho = np.kron(np.diag([0, 1.0]), np.eye(4) / 4)
    tr = run_stroboscopic(U, rho, [0, 1, 7, 100, 1000], (2, 4))
    assert np.allclose(tr.fidelity, 1.0)


@pytest.mark.parametrize("method", ["iterate", "spectral"])
def test_matches_eigenbasis_power_oracle(method):
    m = SpinBathModel(1, 1, np.array([[1.0]]))
    seq = named_qubit_cycle("ZZ", 0.1)
    U = cycle_propagator(seq, build_H0(m))
    rho0 = initial_state(np.array([1, 1]) / np.sqrt(2), m)
    sched = np.arange(0, 201, 7)
    tr = run_stroboscopic(U, rho0, sched, (2, 2), T_c=seq.T_c, method=method)
    w, V = np.linalg.eig(U)
    r0 = partial_trace_bath(rho0, 2, 2)
    for N, f in zip(sched, tr.fidelity):
        UN = (V * w**N) @ np.linalg.inv(V)
        rS = partial_trace_bath(UN @ rho0 @ UN.conj().T, 2, 2)
        assert f == pytest.approx(np.real(np.trace(r0 @ rS)), abs=1e-10)
    assert np.allclose(tr.times, sched * seq.T_c)


def test_trace_and_hermiticity_preserved_over_many_cycles(g):
    U = random_unitary(g, 16)
    rho0 = np.kron(np.diag([1.0, 0.0]), np.eye(8) / 8)
    tr = run_stroboscopic(U, rho0, [10_000], (2, 8), keep_states=True)
    rS = tr.states[0]
    assert abs(np.trace(rS) - 1) < 1e-9
    assert np.abs(rS - rS.conj().T).max() < 1e-9


def test_methods_agree(g):
    U = random_unitary(g, 32)
    rho0 = np.kron(np.diag([1.0, 0, 0, 0]), np.eye(8) / 8)
    sched = [0, 3, 50, 700, 3000]
    a = run_stroboscopic(U, rho0, sched, (4, 8), method="iterate")
    b = run_stroboscopic(U, rho0, sched, (4, 8), method="spectral")
    assert np.allclose(a.fidelity, b.fidelity, atol=1e-10)
    assert np.allclose(a.purity, b.purity, atol=1e-10)


def test_bad_schedule(g):
    with pytest.raises(ValueError):
        run_stroboscopic(np.eye(4), np.eye(4) / 4, [3, 2], (2, 2))


def _traj(f, t=None):
    f = np.asarray(f, dtype=float)
    t = np.arange(f.size, dtype=float) if t is None else np.asarray(t, dtype=float)
    n = np.arange(f.size)
    return Trajectory(n, t, f, np.ones_like(f), "s", {})


def test_stats_guards_and_fits():
    st = trajectory_stats(_traj(np.ones(10)))
    assert st.relative_survival == float("inf") and st.saturation_mean == 1.0
    assert trajectory_stats(_traj(np.full(10, 0.5))).relative_survival == pytest.approx(1.0)
    t = np.linspace(0, 100, 101)
    st = trajectory_stats(_traj(1 - 0.001 * t, t))
    assert st.secular_slope == pytest.approx(-0.001)
    st = trajectory_stats(_traj([1.0, 0.9, 0.8, 0.7]), window_fraction=0.5)
    assert st.saturation_mean == pytest.approx(0.75)
    assert st.saturation_spread == pytest.approx(0.1)
    with pytest.raises(EmptyTrajectory):
        trajectory_stats(_traj([]))


def test_misprepared_examples():
    assert misprepared_asymptotics(0.0, 0.3, 1, 1) == 0.0
    assert misprepared_asymptotics(0.1, 5.0, 1, 1) == pytest.approx(0.01)
    with pytest.raises(InvalidDensity):
        misprepared_state(0.1, 0.0, 1, 1)


def test_misprepared_cubic_residual():
    A, B, C = 1.0, 0.6, -0.4
    deltas = [0.1, 0.05, 0.025]
    r = [abs(misprepared_exact_loss(d, A, B, C) - misprepared_asymptotics(d, A, B, C)) for d in deltas]
    for a, b in zip(r, r[1:]):
        assert 8 * 0.6 < a / b < 8 * 1.4
