"""Cycle propagators and stroboscopic evolution of system-bath states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyTrajectory, InvalidDensity
from .linalg import (
    check_density,
    hermitian_part,
    partial_trace_bath,
    polar_unitary,
    spectral,
    state_metrics,
    unitary_eig,
)
from .pulses import PulseSequence, closure_phase

RENORM_EVERY = 256
LOSS_FLOOR = 1e-15


@dataclass(frozen=True)
class Trajectory:
    cycle_indices: np.ndarray
    times: np.ndarray
    fidelity: np.ndarray
    purity: np.ndarray
    state_label: str = ""
    metadata: dict = field(default_factory=dict)
    states: list | None = None

    def __len__(self) -> int:
        return len(self.cycle_indices)


@dataclass(frozen=True)
class TrajectoryStats:
    saturation_mean: float
    saturation_spread: float
    relative_survival: float
    secular_slope: float


def _apply_system(P: np.ndarray, M: np.ndarray, dim_S: int) -> np.ndarray:
    """``(P x I_B) @ M`` for a system operator ``P``."""
    if P.shape[0] == M.shape[0]:
        return P @ M
    rest = M.shape[1:]
    T = M.reshape(dim_S, -1)
    return (P @ T).reshape(M.shape[0], *rest)


def cycle_propagator(seq: PulseSequence, H0) -> np.ndarray:
    """One-cycle propagator with free evolution preceding each pulse.

    The global phase of the pulse product ``P_n ... P_1`` is divided out so
    that an ideal cycle with ``H0 = 0`` gives exactly the identity.
    """
    H0 = np.asarray(H0, dtype=complex)
    d = H0.shape[0]
    dim_S = seq.dim_S
    if d % dim_S or any(d % s.P.shape[0] for s in seq.segments):
        raise DimensionMismatch(
            f"pulse dimension {dim_S} does not divide H0 dimension {d}"
        )
    sd = spectral(H0)
    V, w = sd.eigenvectors, sd.eigenvalues
    Vh = V.conj().T
    cache: dict[float, np.ndarray] = {}
    U = np.eye(d, dtype=complex)
    for s in seq.segments:
        if s.tau > 0:
            F = cache.get(s.tau)
            if F is None:
                F = (V * np.exp(-1j * s.tau * w)) @ Vh
                cache[s.tau] = F
            U = F @ U
        U = _apply_system(s.P, U, s.P.shape[0])
    return U / closure_phase(seq)


def density_factor(rho: np.ndarray, rel_cut: float = 1e-14) -> np.ndarray:
    """``W`` with ``rho = W W^dagger`` keeping only the nonzero spectrum."""
    w, V = np.linalg.eigh(hermitian_part(rho))
    keep = w > rel_cut * max(w.max(), 0.0)
    return V[:, keep] * np.sqrt(w[keep])


def _reduced_from_factor(W: np.ndarray, dim_S: int) -> np.ndarray:
    Wr = W.reshape(dim_S, -1, W.shape[1])
    return np.einsum("abr,cbr->ac", Wr, Wr.conj())


def run_stroboscopic(
    U_c,
    rho0,
    schedule,
    dims: tuple[int, int],
    *,
    state_label: str = "",
    T_c: float = 1.0,
    metadata: dict | None = None,
    keep_states: bool = False,
    method: str = "iterate",
) -> Trajectory:
    """Evolve ``rho0`` under repeated cycles and sample the reduced system.

    ``method="iterate"`` applies ``U_c`` once per cycle to a square-root
    factor of ``rho0`` (cost per cycle ``d^2 r`` for rank ``r``).
    ``method="spectral"`` diagonalizes ``U_c`` once and jumps straight to
    each scheduled power; it is much cheaper for sparse schedules.
    """
    dim_S, dim_B = dims
    U = np.asarray(U_c, dtype=complex)
    rho0 = check_density(rho0)
    if U.shape != rho0.shape or U.shape[0] != dim_S * dim_B:
        raise DimensionMismatch("U_c, rho0 and dims are inconsistent")
    sched = np.asarray(schedule, dtype=np.int64)
    if sched.size == 0 or np.any(sched < 0) or np.any(np.diff(sched) <= 0):
        raise ValueError("schedule must be a nonempty increasing list of N >= 0")

    U = polar_unitary(U)
    W = density_factor(rho0)
    rho_S0 = partial_trace_bath(rho0, dim_S, dim_B)
    fid = np.empty(sched.size)
    pur = np.empty(sched.size)
    states = [] if keep_states else None

    def record(k, Wn):
        rS = _reduced_from_factor(Wn, dim_S)
        f, p = state_metrics(rho_S0, rS)
        fid[k] = min(max(f, 0.0), 1.0)
        pur[k] = min(max(p, 0.0), 1.0)
        if keep_states:
            states.append(rS)

    if method == "iterate":
        norm0 = np.linalg.norm(W)
        n = 0
        for k, target in enumerate(sched):
            while n < target:
                W = U @ W
                n += 1
                if n % RENORM_EVERY == 0:
                    W *= norm0 / np.linalg.norm(W)
            record(k, W)
    elif method == "spectral":
        phi, Z = unitary_eig(U)
        Y = Z.conj().T @ W
        for k, target in enumerate(sched):
            record(k, Z @ (np.exp(1j * phi * target)[:, None] * Y))
    else:
        raise ValueError(f"unknown method {method!r}")

    meta = dict(metadata or {})
    meta.setdefault("N_total", int(sched[-1]))
    return Trajectory(sched, sched * float(T_c), fid, pur, state_label, meta, states)


def trajectory_stats(
    traj: Trajectory, window_fraction: float = 0.5, f_min: float = 0.5
) -> TrajectoryStats:
    """Plateau statistics over the last ``window_fraction`` of the samples."""
    n = len(traj)
    if n == 0:
        raise EmptyTrajectory("trajectory has no samples")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    m = max(1, int(np.ceil(window_fraction * n)))
    f = np.asarray(traj.fidelity[-m:], dtype=float)
    t = np.asarray(traj.times[-m:], dtype=float)
    mean = float(np.mean(f))
    spread = float(np.max(f) - np.min(f))
    loss = 1.0 - mean
    xi = float("inf") if loss <= LOSS_FLOOR else (1.0 - f_min) / loss
    slope = 0.0
    if m >= 2 and np.ptp(t) > 0:
        slope = float(np.polyfit(t, f, 1)[0])
    return TrajectoryStats(mean, spread, xi, slope)


def misprepared_asymptotics(delta: float, A: float, B: float, C: float) -> float:
    """Leading-order loss ``delta^2 (B^2 + C^2) / 2`` after full dephasing."""
    misprepared_state(delta, A, B, C)
    return 0.5 * delta**2 * (B**2 + C**2)


def misprepared_state(delta: float, A: float, B: float, C: float) -> np.ndarray:
    rho = np.array(
        [[1 - delta * A, delta * (B + 1j * C)], [delta * (B - 1j * C), delta * A]],
        dtype=complex,
    )
    if np.linalg.eigvalsh(rho).min() < -1e-12:
        raise InvalidDensity("preparation parameters give a non-positive state")
    return rho


def dephased(rho: np.ndarray) -> np.ndarray:
    """Long-time state when the computational basis is perfectly preserved."""
    return np.diag(np.diag(rho))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(rho))
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (root convention)."""
    s = _psd_sqrt(rho)
    M = hermitian_part(s @ sigma @ s)
    return float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(M), 0, None))))


def misprepared_exact_loss(delta: float, A: float, B: float, C: float) -> float:
    """Exact loss ``1 - F(rho0, rho_inf)`` for the dephasing channel."""
    rho0 = misprepared_state(delta, A, B, C)
    return 1.0 - uhlmann_fidelity(rho0, dephased(rho0))
