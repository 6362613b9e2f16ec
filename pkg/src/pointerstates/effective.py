"""Effective cycle Hamiltonians, pointer-state decomposition and fidelity bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import BasisNotOrthonormal, BadP, DimensionMismatch, RegimeViolation, ZeroGap
from .linalg import (
    conjugate_system,
    hermitian_part,
    operator_norm,
    principal_log_hamiltonian,
    unitary_eig,
)
from .pulses import PulseSequence

BASIS_TOL = 1e-10
DEGENERACY_REL = 1e-9
B1_THRESHOLD = 0.1
B3_FACTOR = 10.0
MET_FACTOR = 10.0


@dataclass(frozen=True)
class EffectiveDecomposition:
    H_c: np.ndarray
    H_dom: np.ndarray
    H_bath: np.ndarray
    H_per: np.ndarray
    eps_norm: float
    B_j: tuple[np.ndarray, ...]
    gap_Delta: float
    gap_Delta_0: float
    basis: np.ndarray  # rows are the pointer basis, designated states first
    p: int
    dims: tuple[int, int]
    sector_energies: tuple[np.ndarray, ...]
    norm_H_c: float


@dataclass(frozen=True)
class BoundReport:
    quantum_bound: float
    semiclassical_bound: float | None
    cond_B1: bool
    cond_B3: bool
    T_met: float
    met_valid: bool
    eps_norm: float
    gap_Delta: float
    gap_Delta_0: float


def magnus_first_order(seq: PulseSequence, H0) -> np.ndarray:
    """Toggling-frame average ``sum_j tau_j Q_j^dagger H0 Q_j / T_c``."""
    H0 = np.asarray(H0, dtype=complex)
    acc = np.zeros_like(H0)
    for s, Q in zip(seq.segments, seq.toggling_frames()):
        if s.tau:
            acc += s.tau * conjugate_system(H0, Q, Q.shape[0])
    return hermitian_part(acc / seq.T_c)


def exact_cycle_hamiltonian(U_c, T_c: float) -> np.ndarray:
    return principal_log_hamiltonian(U_c, T_c)


def complete_basis(states, D_S: int) -> np.ndarray:
    """Rows: the given orthonormal states followed by an orthonormal complement."""
    B = np.array([np.asarray(s, dtype=complex).reshape(-1) for s in states])
    if B.ndim != 2 or B.shape[1] != D_S:
        raise DimensionMismatch("basis vectors must have length D_S")
    if np.abs(B.conj() @ B.T - np.eye(B.shape[0])).max() > BASIS_TOL:
        raise BasisNotOrthonormal("pointer basis is not orthonormal")
    if B.shape[0] < D_S:
        comp = sla.null_space(B.conj())
        B = np.vstack([B, comp.T])
    return B


def _sector_spectra(Hs: np.ndarray, p: int, D_S: int, dim_B: int) -> list[np.ndarray]:
    """Eigenvalues of each designated block and of the complement block."""
    T = Hs.reshape(D_S, dim_B, D_S, dim_B)
    out = [np.linalg.eigvalsh(hermitian_part(T[j, :, j, :])) for j in range(p)]
    if p < D_S:
        c = D_S - p
        blk = T[p:, :, p:, :].reshape(c * dim_B, c * dim_B)
        out.append(np.linalg.eigvalsh(hermitian_part(blk)))
    return out


def _min_cross_gap(a: np.ndarray, b: np.ndarray) -> float:
    # Both inputs sorted; a merge-style scan keeps this linear.
    if a.size == 0 or b.size == 0:
        return math.inf
    idx = np.searchsorted(b, a)
    lo = np.abs(a - b[np.clip(idx - 1, 0, b.size - 1)])
    hi = np.abs(a - b[np.clip(idx, 0, b.size - 1)])
    return float(min(lo.min(), hi.min()))


def ps_decompose(H_c, ps_basis, p: int, dims: tuple[int, int]) -> EffectiveDecomposition:
    """Split ``H_c`` against the designated pointer states.

    ``ps_basis`` lists the designated states first (``p`` of them); any
    further states, or an automatically completed orthonormal complement,
    span the non-designated sector.  The first basis state is the monitored
    one for ``gap_Delta_0``.
    """
    D_S, dim_B = dims
    H_c = np.asarray(H_c, dtype=complex)
    if H_c.shape[0] != D_S * dim_B:
        raise DimensionMismatch("H_c dimension does not match dims")
    if not 1 <= p <= D_S:
        raise BadP(f"p must lie in 1..{D_S}")
    B = complete_basis(list(ps_basis), D_S)
    Ub = B.T  # columns are basis states

    trS = np.einsum("ibic->bc", H_c.reshape(D_S, dim_B, D_S, dim_B))
    H_bath = np.kron(np.eye(D_S), trS / D_S)
    G = conjugate_system(H_c - H_bath, Ub, D_S).reshape(D_S, dim_B, D_S, dim_B)

    dom = np.zeros_like(G)
    B_j = []
    for j in range(p):
        dom[j, :, j, :] = G[j, :, j, :]
        B_j.append(G[j, :, j, :].copy())
    if p < D_S:
        dom[p:, :, p:, :] = G[p:, :, p:, :]
    d = D_S * dim_B
    Ufull = np.kron(Ub, np.eye(dim_B))
    H_dom = hermitian_part(Ufull @ dom.reshape(d, d) @ Ufull.conj().T)
    H_per = hermitian_part(H_c - H_dom - H_bath)

    # Sector spectra of H_dom + H_bath in the pointer frame.
    Hs = dom.reshape(d, d) + H_bath
    spectra = _sector_spectra(Hs, p, D_S, dim_B)
    gap = math.inf
    gap0 = math.inf
    for a in range(len(spectra)):
        for b in range(a + 1, len(spectra)):
            g = _min_cross_gap(spectra[a], spectra[b])
            gap = min(gap, g)
            if a == 0:
                gap0 = min(gap0, g)
    if len(spectra) == 1:
        gap = gap0 = 0.0

    return EffectiveDecomposition(
        H_c=H_c,
        H_dom=H_dom,
        H_bath=H_bath,
        H_per=H_per,
        eps_norm=operator_norm(H_per),
        B_j=tuple(B_j),
        gap_Delta=float(gap),
        gap_Delta_0=float(gap0),
        basis=B,
        p=p,
        dims=(D_S, dim_B),
        sector_energies=tuple(spectra),
        norm_H_c=operator_norm(H_c),
    )


def met_time_average(E, U_D, N: int) -> np.ndarray:
    """``(1/N) sum_{n<N} U_D^{-n} E U_D^n`` via the eigenbasis of ``U_D``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    E = np.asarray(E, dtype=complex)
    phi, Z = unitary_eig(U_D)
    Et = Z.conj().T @ E @ Z
    g = kernels.geometric_factors(phi, int(N))
    return Z @ (g * Et) @ Z.conj().T


def off_commutant_norm(E, U_D, N: int) -> float:
    """Norm of the part of the time average outside the commutant of ``U_D``."""
    E = np.asarray(E, dtype=complex)
    phi, Z = unitary_eig(U_D)
    Et = Z.conj().T @ E @ Z
    g = kernels.geometric_factors(phi, int(N))
    same = np.abs(1 - np.exp(1j * (phi[None, :] - phi[:, None]))) < kernels.PHASE_TOL
    M = np.where(same, 0, g * Et)
    return float(np.linalg.norm(M, 2))


def _semiclassical_bound(decomp: EffectiveDecomposition) -> float:
    D_S, _ = decomp.dims
    Ub = decomp.basis.T
    Hd = conjugate_system(decomp.H_dom + decomp.H_bath, Ub, D_S)
    Hp = conjugate_system(decomp.H_per, Ub, D_S)
    # Unperturbed eigenstates: the monitored state is basis index 0.
    w, V = np.linalg.eigh(hermitian_part(Hd))
    k0 = int(np.argmax(np.abs(V[0, :])))
    E0 = w[k0]
    worst = 0.0
    for k in range(D_S):
        if k == k0:
            continue
        amp = V[:, k0].conj() @ Hp @ V[:, k]
        om = w[k] - E0
        if abs(om) < DEGENERACY_REL * max(decomp.norm_H_c, 1e-300):
            if abs(amp) > 0:
                raise ZeroGap("unperturbed level degenerate with the pointer state")
            continue
        worst = max(worst, abs(amp) ** 2 / om**2)
    return 1.0 - 4.0 * D_S * worst


def ps_fidelity_bounds(
    decomp: EffectiveDecomposition,
    T_c: float,
    T_total: float,
    *,
    b1_threshold: float = B1_THRESHOLD,
    b3_factor: float = B3_FACTOR,
    met_factor: float = MET_FACTOR,
) -> BoundReport:
    """Long-time fidelity lower bounds and the conditions they rest on."""
    tol = DEGENERACY_REL * max(decomp.norm_H_c, 1e-300)
    g0 = decomp.gap_Delta_0
    if not g0 > tol:
        raise ZeroGap(
            "pointer sector is degenerate with another sector; desymmetrize the cycle"
        )
    s = math.sin(T_c * g0 / 2)
    if abs(s) < 1e-9:
        raise ZeroGap("T_c * gap is a multiple of 2 pi")
    eps = decomp.eps_norm
    qb = min(max(1.0 - eps * T_c / abs(s), 0.0), 1.0)
    sb = None
    if decomp.dims[1] == 1:
        sb = min(max(_semiclassical_bound(decomp), 0.0), 1.0)
    gap = decomp.gap_Delta
    return BoundReport(
        quantum_bound=qb,
        semiclassical_bound=sb,
        cond_B1=bool(eps * T_total < b1_threshold),
        cond_B3=bool(gap > b3_factor * eps),
        T_met=1.0 / gap if gap > 0 else math.inf,
        met_valid=bool(T_total * gap > met_factor),
        eps_norm=eps,
        gap_Delta=gap,
        gap_Delta_0=g0,
    )


def initial_decay_bound(delta: float, N: int) -> float:
    """Short-time bound ``(e - 1) N delta`` on the fidelity loss."""
    if delta < 0 or N < 0:
        raise ValueError("delta and N must be nonnegative")
    if N * delta > 1:
        raise RegimeViolation("N * delta exceeds 1")
    return (math.e - 1) * N * delta
