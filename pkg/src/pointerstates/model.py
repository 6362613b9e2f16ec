"""Central-spin Hamiltonians with random couplings.

The system is one or two spin-1/2 qubits.  They couple to ``n_B`` bath spins
through isotropic Heisenberg terms, and the bath spins interact with each other
through dipolar terms.  Spin operators are half Pauli matrices.  Sites are
ordered with system qubits first, then bath spins, so the system is always the
leftmost tensor factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import rng
from .errors import DimensionMismatch, DimensionTooLarge, NotNormalized

MAX_SITES = 11
NORM_TOL = 1e-10

_PAULI_SPARSE = (
    sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
)


@dataclass(frozen=True)
class CouplingEnsembleSpec:
    J_cap: float = 1.0
    beta_cap: float = 0.0
    K: float | None = None
    n_qubits: int = 1
    n_B: int = 1
    seed: int = 0

    def resolved_K(self) -> float:
        if self.n_qubits == 1:
            return 0.0
        return float(self.J_cap if self.K is None else self.K)


@dataclass(frozen=True)
class SpinBathModel:
    n_qubits: int
    n_B: int
    j: np.ndarray  # (n_B, n_qubits)
    beta: np.ndarray = field(default=None)  # (n_B, n_B), strictly lower triangle used
    K: float = 0.0
    seed: int = 0

    def __post_init__(self):
        _check_sizes(self.n_qubits, self.n_B)
        j = np.asarray(self.j, dtype=float).reshape(self.n_B, self.n_qubits)
        beta = self.beta
        beta = np.zeros((self.n_B, self.n_B)) if beta is None else np.tril(np.asarray(beta, float), -1)
        if beta.shape != (self.n_B, self.n_B):
            raise DimensionMismatch("beta must be n_B x n_B")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "beta", beta)

    @property
    def dim_S(self) -> int:
        return 2**self.n_qubits

    @property
    def dim_B(self) -> int:
        return 2**self.n_B

    @property
    def dim(self) -> int:
        return self.dim_S * self.dim_B


def _check_sizes(n_qubits: int, n_B: int) -> None:
    if n_qubits not in (1, 2):
        raise DimensionMismatch("n_qubits must be 1 or 2")
    if n_B < 1 or n_qubits + n_B > MAX_SITES:
        raise DimensionTooLarge(
            f"2^{n_qubits + n_B} exceeds the supported dimension 2^{MAX_SITES}"
            if n_B >= 1
            else "n_B must be at least 1"
        )


def sample_couplings(spec: CouplingEnsembleSpec) -> SpinBathModel:
    """Draw uniform couplings on the symmetric intervals set by the caps."""
    _check_sizes(spec.n_qubits, spec.n_B)
    g = rng.stream(spec.seed, "couplings.j")
    j = g.uniform(-spec.J_cap, spec.J_cap, size=(spec.n_B, spec.n_qubits))
    beta = np.zeros((spec.n_B, spec.n_B))
    if spec.beta_cap > 0:
        g = rng.stream(spec.seed, "couplings.beta")
        rows, cols = np.tril_indices(spec.n_B, -1)
        beta[rows, cols] = g.uniform(-spec.beta_cap, spec.beta_cap, size=rows.size)
    return SpinBathModel(spec.n_qubits, spec.n_B, j, beta, spec.resolved_K(), spec.seed)


def spin_op(site: int, axis: int, n_sites: int) -> sp.csr_matrix:
    """Half-Pauli operator ``S_axis`` acting on ``site`` (axis 0, 1, 2 = x, y, z)."""
    left = sp.identity(2**site, dtype=complex, format="csr")
    right = sp.identity(2 ** (n_sites - site - 1), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, 0.5 * _PAULI_SPARSE[axis]), right, format="csr")


def _pair(a: int, b: int, n_sites: int, weights=(1.0, 1.0, 1.0)) -> sp.csr_matrix:
    out = sp.csr_matrix((2**n_sites, 2**n_sites), dtype=complex)
    for axis, w in enumerate(weights):
        if w:
            out = out + w * (spin_op(a, axis, n_sites) @ spin_op(b, axis, n_sites))
    return out


def build_H0(model: SpinBathModel) -> np.ndarray:
    """Heisenberg system-bath coupling, dipolar bath and system exchange."""
    nq, nb = model.n_qubits, model.n_B
    n = nq + nb
    H = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for m in range(nb):
        for k in range(nq):
            if model.j[m, k]:
                H = H + model.j[m, k] * _pair(k, nq + m, n)
    for m in range(nb):
        for mp in range(m):
            if model.beta[m, mp]:
                H = H + model.beta[m, mp] * _pair(nq + m, nq + mp, n, (1.0, 1.0, -2.0))
    if nq == 2 and model.K:
        H = H + model.K * _pair(0, 1, n)
    H = H.toarray()
    return 0.5 * (H + H.conj().T)


def coupling_strength_A(model: SpinBathModel, qubit_index: int = 0) -> float:
    jk = model.j[:, qubit_index]
    return float(np.sqrt(np.sum(jk**2) / model.n_B))


def normalized_state(psi, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise NotNormalized("state vector is not normalized")
    return psi


def initial_state(system_state, model: SpinBathModel) -> np.ndarray:
    """``|psi><psi|`` on the system times the fully mixed bath."""
    psi = normalized_state(system_state)
    if psi.size != model.dim_S:
        raise DimensionMismatch(f"system state has length {psi.size}, expected {model.dim_S}")
    return np.kron(np.outer(psi, psi.conj()), np.eye(model.dim_B) / model.dim_B)
