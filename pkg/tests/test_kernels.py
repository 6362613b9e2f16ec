from __future__ import annotations

import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from pointerstates import _kernels_py as py
from pointerstates import kernels

try:
    from pointerstates import _kernels as cy
except ImportError:  # pragma: no cover - extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def _quats(g, n):
    c = g.normal(size=(n, 4))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def test_dispatch_reports_backend():
    assert kernels.BACKEND in ("cython", "python")
    if cy is not None:
        assert kernels.BACKEND == "cython"


def test_pure_env_forces_python():
    code = "import pointerstates.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, POINTERSTATES_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    importlib.reload(kernels)


def test_geometric_factor_values():
    phi = np.array([0.0, 0.5, 0.5 + 1e-14])
    G = py.geometric_factors(phi, 7)
    assert np.allclose(np.diag(G), 1)
    assert G[1, 2] == 1 and G[2, 1] == 1
    x = np.exp(0.5j)
    assert G[0, 1] == pytest.approx((1 - x**7) / (7 * (1 - x)))


@needs_ext
def test_backends_agree_geometric(g):
    phi = g.uniform(-np.pi, np.pi, 9)
    phi[3] = phi[5]
    for N in (1, 10, 12345):
        assert np.abs(cy.geometric_factors(phi, N) - py.geometric_factors(phi, N)).max() < 1e-12


@needs_ext
def test_backends_agree_ensemble(g):
    c = _quats(g, 2000)
    c[0] = [1, 0, 0, 0]
    c[1] = [-0.6, 0.8, 0, 0]
    r = np.array([0.6, 0.0, 0.8])
    Ns = np.array([0, 1, 2, 17, 1000])
    for a, b in zip(cy.ensemble_sums(c, r, Ns), py.ensemble_sums(c, r, Ns)):
        assert np.abs(a - b).max() < 1e-9


def test_ensemble_sums_direct(g):
    c = _quats(g, 3)
    r = np.array([0.0, 0.0, 1.0])
    from pointerstates.semiclassical import quat_to_unitary

    for N in (0, 1, 5):
        loss, _, bloch = py.ensemble_sums(c, r, np.array([N]))
        expect_loss = 0.0
        expect_bloch = np.zeros(3)
        for q in c:
            U = np.linalg.matrix_power(quat_to_unitary(q), N)
            psi = U @ np.array([1, 0])
            expect_loss += abs(psi[1]) ** 2
            rho = np.outer(psi, psi.conj())
            expect_bloch += np.real(
                [rho[0, 1] + rho[1, 0], 1j * (rho[0, 1] - rho[1, 0]), rho[0, 0] - rho[1, 1]]
            )
        assert loss[0] == pytest.approx(expect_loss, abs=1e-12)
        assert np.allclose(bloch[0], expect_bloch, atol=1e-12)
