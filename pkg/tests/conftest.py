from __future__ import annotations

import sys

import numpy as np
import pytest


def random_hermitian(g: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    X = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    H = (X + X.conj().T) / 2
    return scale * H / np.linalg.norm(H, 2)


def random_unitary(g: np.random.Generator, d: int) -> np.ndarray:
    X = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    Q, R = np.linalg.qr(X)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_density(g: np.random.Generator, d: int) -> np.ndarray:
    X = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def g():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
