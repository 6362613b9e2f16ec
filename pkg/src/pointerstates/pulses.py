"""Pulse cycles for pointer-state engineering and dynamical decoupling.

A cycle is a list of segments ``(tau, P)``: free evolution for ``tau``
followed by an instantaneous pulse ``P``.  The cycle propagator is therefore
``P_n exp(-i tau_n H0) ... P_1 exp(-i tau_1 H0)``.  An ideal cycle closes,
meaning ``P_n ... P_1`` is the identity up to a global phase.

Nested ZZ cycles for two qubits can be built from the same pieces.  Take the
ZZ cycle of qubit 1 (``uniform_cycle(kron(Z, I), 2, tau)``) and pass it to
:func:`desymmetrize` with ``R = kron(I, Z)``.  The result interleaves the
second qubit's reflection into every half interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadP,
    BasisNotOrthonormal,
    CycleNotClosed,
    DimensionMismatch,
    MissingErrorEntry,
    NotNormalized,
    RNotInvolution,
    UnknownName,
)
from .linalg import I2, SX, SY, SZ, evolve_propagator, operator_norm, tensor

CLOSURE_TOL = 1e-9
BASIS_TOL = 1e-10

S2 = 1 / np.sqrt(2)

# Bell states, indexed as in the EPR_k naming.
BELL = (
    np.array([0, S2, S2, 0], dtype=complex),
    np.array([0, S2, -S2, 0], dtype=complex),
    np.array([S2, 0, 0, S2], dtype=complex),
    np.array([S2, 0, 0, -S2], dtype=complex),
)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


@dataclass(frozen=True)
class Segment:
    tau: float
    P: np.ndarray
    label: str | None  # None marks a free interval without a pulse


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[Segment, ...]
    label: str = ""
    ideal: bool = True
    dim_S: int = field(default=0)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise DimensionMismatch("a cycle needs at least one segment")
        dims = {s.P.shape[0] for s in segs}
        dim_S = self.dim_S or min(dims)
        if any(d % dim_S for d in dims):
            raise DimensionMismatch("pulse dimensions are inconsistent")
        if any(s.tau < 0 for s in segs):
            raise ValueError("intervals must be nonnegative")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "dim_S", dim_S)
        if self.ideal and closure_defect(self) > CLOSURE_TOL:
            raise CycleNotClosed(f"cycle {self.label!r} does not close")

    @property
    def T_c(self) -> float:
        return float(sum(s.tau for s in self.segments))

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.segments])

    @property
    def pulses(self) -> list[np.ndarray]:
        return [s.P for s in self.segments]

    def toggling_frames(self) -> list[np.ndarray]:
        """``Q_j = P_{j-1} ... P_1`` for each segment, with ``Q_1 = I``."""
        Q = np.eye(self.segments[0].P.shape[0], dtype=complex)
        out = []
        for s in self.segments:
            out.append(Q)
            Q = _matmul_mixed(s.P, Q)
        return out


@dataclass(frozen=True)
class PulseErrorModel:
    errors: dict

    @property
    def eps_err(self) -> float:
        return max((operator_norm(E) for E in self.errors.values()), default=0.0)


def _matmul_mixed(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape[0] == B.shape[0]:
        return A @ B
    if A.shape[0] > B.shape[0]:
        return A @ np.kron(B, np.eye(A.shape[0] // B.shape[0]))
    return np.kron(A, np.eye(B.shape[0] // A.shape[0])) @ B


def cycle_product(seq: PulseSequence) -> np.ndarray:
    out = np.eye(seq.segments[0].P.shape[0], dtype=complex)
    for s in seq.segments:
        out = _matmul_mixed(s.P, out)
    return out


def closure_defect(seq: PulseSequence) -> float:
    M = cycle_product(seq)
    return abs(1 - abs(np.trace(M)) / M.shape[0])


def closure_phase(seq: PulseSequence) -> complex:
    """Global phase ``c`` with ``P_n ... P_1 = c I`` (meaningful for closed cycles)."""
    M = cycle_product(seq)
    t = np.trace(M)
    return t / abs(t) if abs(t) > 0 else 1.0


def _normalized(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1) > BASIS_TOL:
        raise NotNormalized("state vector is not normalized")
    return v


def reflection_Q(target, D_S: int | None = None) -> np.ndarray:
    """``2|psi><psi| - I``."""
    psi = _normalized(target)
    if D_S is not None and psi.size != D_S:
        raise DimensionMismatch(f"state has length {psi.size}, expected {D_S}")
    return 2 * np.outer(psi, psi.conj()) - np.eye(psi.size)


def sigma_pulse(D_S: int, p: int, basis=None) -> np.ndarray:
    """Phase the first ``p`` basis states by successive powers of ``exp(2 pi i/(p+1))``.

    ``basis`` is a sequence of state vectors (rows); at least ``p`` are
    needed.  The computational basis is used when it is omitted.
    """
    if not 1 <= p <= D_S - 1:
        raise BadP(f"p must lie in 1..{D_S - 1}, got {p}")
    if basis is None:
        basis = np.eye(D_S, dtype=complex)
    B = np.array([np.asarray(b, dtype=complex).reshape(-1) for b in basis])
    if B.ndim != 2 or B.shape[1] != D_S or B.shape[0] < p:
        raise DimensionMismatch("basis must hold at least p vectors of length D_S")
    if np.abs(B.conj() @ B.T - np.eye(B.shape[0])).max() > BASIS_TOL:
        raise BasisNotOrthonormal("basis vectors are not orthonormal")
    omega = np.exp(2j * np.pi / (p + 1))
    out = np.eye(D_S, dtype=complex)
    for k in range(p):
        out += (omega ** (k + 1) - 1) * np.outer(B[k], B[k].conj())
    return out


def uniform_cycle(P, n_pulses: int, tau: float, label: str = "P") -> PulseSequence:
    """``n_pulses`` repetitions of ``f P``."""
    P = np.asarray(P, dtype=complex)
    if tau <= 0:
        raise ValueError("tau must be positive")
    seg = Segment(float(tau), P, label)
    return PulseSequence(tuple([seg] * n_pulses), label=f"{label}^{n_pulses}")


def named_qubit_cycle(name: str, tau: float) -> PulseSequence:
    if tau <= 0:
        raise ValueError("tau must be positive")
    t = float(tau)
    if name == "ZZ":
        segs = [Segment(t, SZ, "Z")] * 2
    elif name == "XYXY":
        segs = [Segment(t, SX, "X"), Segment(t, SY, "Y")] * 2
    elif name == "XZXZ":
        # Z is an X pulse immediately followed by a Y pulse.
        segs = [Segment(t, SX, "X"), Segment(t, SX, "X"), Segment(0.0, SY, "Y")] * 2
    else:
        raise UnknownName(f"unknown qubit cycle {name!r}")
    return PulseSequence(tuple(segs), label=name)


def _spin_pair_ops():
    S = [0.5 * s for s in (SX, SY, SZ)]
    return [tensor(s, s) for s in S]


def epr_pulse(which: str) -> np.ndarray:
    xx, _, zz = _spin_pair_ops()
    if which == "E1":
        return SWAP.copy()
    if which == "E2":
        return evolve_propagator(xx + zz, -4 * np.pi / 3)
    if which == "E3":
        return evolve_propagator(xx + 2 * zz, -np.pi) * np.exp(1j * np.pi / 4)
    raise UnknownName(f"unknown Bell cycle {which!r}")


EPR_REPEATS = {"E1": 2, "E2": 3, "E3": 4}

# Designated pointer states and their count p for each Bell cycle.  The
# remaining Bell states complete the basis.
EPR_POINTER_SETS = {
    "E1": ((1, 0, 2, 3), 1),
    "E2": ((2, 1, 0, 3), 2),
    "E3": ((3, 2, 1, 0), 4),
}


def epr_pointer_basis(which: str) -> tuple[list[np.ndarray], int]:
    if which not in EPR_POINTER_SETS:
        raise UnknownName(f"unknown Bell cycle {which!r}")
    order, p = EPR_POINTER_SETS[which]
    return [BELL[k] for k in order], p


def epr_cycle(which: str, tau: float) -> PulseSequence:
    if which not in EPR_REPEATS:
        raise UnknownName(f"unknown Bell cycle {which!r}")
    seq = uniform_cycle(epr_pulse(which), EPR_REPEATS[which], tau, label=which)
    return replace(seq, label=which)


def desymmetrize(base: PulseSequence, R) -> PulseSequence:
    """Interleave the involution ``R`` into a uniform cycle.

    Each segment ``f P`` becomes ``f R f (P R)`` with both intervals halved,
    so the cycle time and the closing product are unchanged.
    """
    R = np.asarray(R, dtype=complex)
    R2 = R @ R
    if abs(1 - abs(np.trace(R2)) / R.shape[0]) > CLOSURE_TOL:
        raise RNotInvolution("R squared is not proportional to the identity")
    segs = []
    for s in base.segments:
        half = s.tau / 2
        rlabel = "R"
        segs.append(Segment(half, R, rlabel))
        segs.append(Segment(half, _matmul_mixed(s.P, R), f"{s.label}.R"))
    return PulseSequence(tuple(segs), label=f"desym({base.label})", ideal=base.ideal)


def uhrig_times(n_pulses: int, T_c: float) -> np.ndarray:
    if n_pulses < 1:
        raise ValueError("n_pulses must be at least 1")
    j = np.arange(1, n_pulses + 1)
    return T_c * np.sin(j * np.pi / (2 * n_pulses + 2)) ** 2


def uhrig_intervals(n_pulses: int, T_c: float) -> np.ndarray:
    """Gaps between consecutive pulse times, ending with the drift to ``T_c``."""
    t = uhrig_times(n_pulses, T_c)
    return np.diff(np.concatenate(([0.0], t, [T_c])))


def uhrig_cycle(P, n_pulses: int, T_c: float, label: str = "P") -> PulseSequence:
    """Pulses at the interior Uhrig times.

    For odd ``n_pulses`` an extra ``P`` at ``T_c`` closes the cycle; for even
    ``n_pulses`` the last interval is free.
    """
    P = np.asarray(P, dtype=complex)
    dt = uhrig_intervals(n_pulses, T_c)
    segs = [Segment(float(d), P, label) for d in dt[:-1]]
    if n_pulses % 2:
        segs.append(Segment(float(dt[-1]), P, label))
    else:
        segs.append(Segment(float(dt[-1]), np.eye(P.shape[0], dtype=complex), None))
    return PulseSequence(tuple(segs), label=f"UDD{n_pulses}({label})")


def pauli_error(eta: float, e) -> np.ndarray:
    """``eta (e_x X + e_y Y + e_z Z)``."""
    ex, ey, ez = e
    return eta * (ex * SX + ey * SY + ez * SZ)


def apply_pulse_errors(seq: PulseSequence, errs: PulseErrorModel) -> PulseSequence:
    """Replace each pulse ``P`` by ``P exp(-i E_P)`` keyed by the pulse label."""
    segs = []
    for s in seq.segments:
        if s.label is None:
            segs.append(s)
            continue
        if s.label not in errs.errors:
            raise MissingErrorEntry(f"no error action for pulse {s.label!r}")
        E = np.asarray(errs.errors[s.label], dtype=complex)
        U = evolve_propagator(E, 1.0)
        segs.append(Segment(s.tau, _matmul_mixed(s.P, U), s.label))
    return PulseSequence(tuple(segs), label=seq.label + "*", ideal=False, dim_S=seq.dim_S)


__all__ = [
    "BELL",
    "I2",
    "SWAP",
    "PulseErrorModel",
    "PulseSequence",
    "Segment",
    "apply_pulse_errors",
    "closure_defect",
    "closure_phase",
    "cycle_product",
    "desymmetrize",
    "epr_cycle",
    "epr_pointer_basis",
    "epr_pulse",
    "named_qubit_cycle",
    "pauli_error",
    "reflection_Q",
    "sigma_pulse",
    "uhrig_cycle",
    "uhrig_intervals",
    "uhrig_times",
    "uniform_cycle",
]
