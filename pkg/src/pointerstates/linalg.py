"""Dense complex operator algebra.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Exponentials go
through the Hermitian eigendecomposition and logarithms through the complex
Schur form of the unitary, never through series expansions, so branch choices
are explicit.

Composite spaces are ordered system-first: the basis state ``|j>|b>`` has flat
index ``j * dim_B + b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    BranchAmbiguity,
    DimensionMismatch,
    InvalidDensity,
    NonHermitianInput,
    NotPureInitial,
)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
BRANCH_MARGIN = 1e-6

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    operator_norm: float

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_operator(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the operands, leftmost factor slowest."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def check_hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    A = as_operator(A)
    scale = max(np.abs(A).max(initial=0.0), np.finfo(float).tiny)
    if np.abs(A - A.conj().T).max(initial=0.0) > tol * scale:
        raise NonHermitianInput("operator is not Hermitian within tolerance")
    return A


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = as_operator(U)
    return bool(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() <= tol)


def polar_unitary(U: np.ndarray) -> np.ndarray:
    """Closest unitary to ``U`` in Frobenius norm (polar factor)."""
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


def spectral(A) -> SpectralData:
    """Full eigendecomposition of a Hermitian operator.

    Eigenvalues ascend.  Each eigenvector column is rephased so that its
    largest-magnitude entry is real and positive; within a degenerate cluster
    the basis is still whatever LAPACK returned.
    """
    A = check_hermitian(A)
    w, V = np.linalg.eigh(hermitian_part(A))
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(V.shape[1])]
    V = V * (np.abs(lead) / np.where(lead == 0, 1, lead))
    norm = float(np.abs(w).max(initial=0.0))
    return SpectralData(w, V, norm)


def operator_norm(A: np.ndarray) -> float:
    """Largest singular value; uses ``eigvalsh`` when ``A`` is Hermitian."""
    A = as_operator(A)
    if A.size == 0:
        return 0.0
    if np.abs(A - A.conj().T).max() <= HERMITIAN_TOL * max(np.abs(A).max(), 1e-300):
        return float(np.abs(np.linalg.eigvalsh(hermitian_part(A))).max())
    return float(np.linalg.norm(A, 2))


def evolve_propagator(H, t: float) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H``."""
    sd = spectral(H)
    V = sd.eigenvectors
    return (V * np.exp(-1j * t * sd.eigenvalues)) @ V.conj().T


def unitary_eig(U) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases and an orthonormal eigenbasis of a unitary.

    Uses the complex Schur form, which for a normal matrix is diagonal and
    keeps the eigenbasis orthonormal even inside degenerate clusters.
    Returns ``(phi, Z)`` with ``U = Z diag(exp(i phi)) Z^dagger`` and
    ``phi`` in ``(-pi, pi]``.
    """
    U = as_operator(U)
    T, Z = sla.schur(U, output="complex")
    return np.angle(np.diag(T)), Z


def principal_log_hamiltonian(U, T_c: float) -> np.ndarray:
    """Hermitian ``H`` with ``exp(-i T_c H) = U`` on the principal branch."""
    if T_c <= 0:
        raise ValueError("T_c must be positive")
    phi, Z = unitary_eig(U)
    if np.any(np.abs(phi) > np.pi - BRANCH_MARGIN):
        raise BranchAmbiguity(
            "eigenphase within %.0e of +-pi; %s" % (BRANCH_MARGIN, BranchAmbiguity.hint)
        )
    H = (Z * (-phi / T_c)) @ Z.conj().T
    return hermitian_part(H)


def conjugate_system(H: np.ndarray, Q: np.ndarray, dim_S: int) -> np.ndarray:
    """``(Q x I_B)^dagger H (Q x I_B)`` without forming the Kronecker product.

    ``Q`` may also be a full composite-space operator, in which case it is
    used as is.
    """
    if Q.shape[0] != dim_S:
        return Q.conj().T @ H @ Q
    d = H.shape[0]
    dim_B = d // dim_S
    T = H.reshape(dim_S, dim_B, dim_S, dim_B)
    T = np.einsum("ia,ibjc,jd->adbc", Q.conj(), T, Q, optimize=True)
    return T.transpose(0, 2, 1, 3).reshape(d, d)


def lift(P: np.ndarray, dim_total: int) -> np.ndarray:
    """Embed a system operator as ``P x I_B``; full-size operators pass through."""
    if P.shape[0] == dim_total:
        return P
    if dim_total % P.shape[0]:
        raise DimensionMismatch(
            f"system dimension {P.shape[0]} does not divide {dim_total}"
        )
    return np.kron(P, np.eye(dim_total // P.shape[0]))


def check_density(rho, tol: float = TRACE_TOL) -> np.ndarray:
    rho = check_hermitian(rho)
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidDensity("trace differs from 1")
    if np.linalg.eigvalsh(hermitian_part(rho)).min() < -tol:
        raise InvalidDensity("negative eigenvalue")
    return rho


def partial_trace_bath(rho, dim_S: int, dim_B: int) -> np.ndarray:
    rho = as_operator(rho)
    if rho.shape[0] != dim_S * dim_B:
        raise DimensionMismatch(
            f"rho has dimension {rho.shape[0]}, expected {dim_S}*{dim_B}"
        )
    return np.einsum("ibjb->ij", rho.reshape(dim_S, dim_B, dim_S, dim_B))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def state_metrics(rho_S_initial, rho_S_now) -> tuple[float, float]:
    """Survival probability ``Tr[rho0 rho]`` and purity ``Tr[rho^2]``."""
    rho0 = as_operator(rho_S_initial)
    rho = as_operator(rho_S_now)
    if purity(rho0) < 1 - 1e-9:
        raise NotPureInitial("reference state must be pure")
    fid = float(np.real(np.vdot(rho0.conj().T, rho)))
    return fid, purity(rho)


def ket(amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex).reshape(-1)


def projector(psi) -> np.ndarray:
    psi = ket(psi)
    return np.outer(psi, psi.conj())
