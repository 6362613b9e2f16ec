"""Randomized invariants checked with hypothesis."""

from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pointerstates import _kernels_py as py
from pointerstates.linalg import (
    evolve_propagator,
    partial_trace_bath,
    principal_log_hamiltonian,
    state_metrics,
)
from pointerstates.propagate import run_stroboscopic
from pointerstates.semiclassical import realization_fidelity

seeds = st.integers(0, 2**32 - 1)
SETTINGS = settings(max_examples=40, deadline=None)


def _herm(g, d, scale=1.0):
    A = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    H = (A + A.conj().T) / 2
    return scale * H / np.linalg.norm(H, 2)


def _density(g, d):
    A = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


@SETTINGS
@given(seeds, st.sampled_from([2, 3, 4, 6]), st.floats(0.05, 2.5))
def test_log_roundtrip(seed, d, t):
    g = np.random.default_rng(seed)
    H = _herm(g, d)
    U = evolve_propagator(H, t)
    assert np.allclose(evolve_propagator(principal_log_hamiltonian(U, t), t), U, atol=1e-10)


@SETTINGS
@given(seeds, st.sampled_from([(2, 2), (2, 3), (4, 2)]))
def test_partial_trace_is_density(seed, dims):
    g = np.random.default_rng(seed)
    r = partial_trace_bath(_density(g, dims[0] * dims[1]), *dims)
    assert abs(np.trace(r) - 1) < 1e-12
    assert np.allclose(r, r.conj().T)
    assert np.linalg.eigvalsh(r).min() > -1e-12


@SETTINGS
@given(seeds)
def test_metrics_in_range(seed):
    g = np.random.default_rng(seed)
    psi = g.normal(size=2) + 1j * g.normal(size=2)
    psi /= np.linalg.norm(psi)
    f, p = state_metrics(np.outer(psi, psi.conj()), _density(g, 2))
    assert -1e-12 <= f <= 1 + 1e-12 and 0.5 - 1e-12 <= p <= 1 + 1e-12


@SETTINGS
@given(seeds, st.integers(1, 50))
def test_stroboscopic_methods_agree(seed, N):
    g = np.random.default_rng(seed)
    U = evolve_propagator(_herm(g, 8), 0.7)
    rho0 = np.kron(np.diag([1.0, 0.0]), np.eye(4) / 4)
    a = run_stroboscopic(U, rho0, [0, N], (2, 4), method="iterate")
    b = run_stroboscopic(U, rho0, [0, N], (2, 4), method="spectral")
    assert np.allclose(a.fidelity, b.fidelity, atol=1e-10)
    assert np.allclose(a.purity, b.purity, atol=1e-10)


@SETTINGS
@given(seeds, st.integers(1, 1000))
def test_geometric_factor_bounded(seed, N):
    phi = np.random.default_rng(seed).uniform(-np.pi, np.pi, 6)
    G = py.geometric_factors(phi, N)
    assert np.abs(G).max() <= 1 + 1e-9
    assert np.allclose(G, G.conj().T)


@SETTINGS
@given(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3), st.floats(0, 0.2),
    st.integers(0, 10_000), st.floats(0.001, 1.0),
)
def test_realization_fidelity_bounds(hx, hy, hz, eps, N, T_c):
    f = realization_fidelity(hx, hy, hz, eps, N, T_c)
    floor = 1 - eps**2 * (hx**2 + hy**2) / (4 * hz**2)
    assert floor - 1e-12 <= f <= 1 + 1e-15
