"""Qubit in a random static field, and imperfect-pulse ESR cycles.

SU(2) elements are stored as real quaternions ``(a0, ax, ay, az)`` with
``U = a0 I - i (ax X + ay Y + az Z)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .errors import UnknownName, ZeroSplitting
from .linalg import SX, SY, SZ, principal_log_hamiltonian
from .propagate import Trajectory
from .pulses import PulseSequence

CHUNK = 65536
ESR_WARN = 0.2


@dataclass(frozen=True)
class RandomFieldSpec:
    """Static field ``b`` for ``H = b . sigma``.

    ``convention="magnitude"`` draws the signed magnitude from ``N(0, B)`` and
    the direction uniformly on the sphere.  ``convention="components"`` draws
    each Cartesian component from ``N(0, B)``.
    """

    distribution: str = "isotropic-gaussian"
    B: float = 1.0
    vector: tuple[float, float, float] = (0.0, 0.0, 0.0)
    n_samples: int = 1000
    seed: int = 0
    convention: str = "magnitude"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.distribution == "isotropic-gaussian":
            if not self.B > 0:
                raise ValueError("B must be positive")
            if self.convention not in ("magnitude", "components"):
                raise UnknownName(f"unknown field convention {self.convention!r}")
        elif self.distribution == "fixed-vector":
            if not np.all(np.isfinite(self.vector)):
                raise ValueError("field vector must be finite")
        else:
            raise UnknownName(f"unknown field distribution {self.distribution!r}")


@dataclass(frozen=True)
class ESRPulseErrorSpec:
    eps0: float = 0.0
    n0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.eps0 < 0 or self.n0 < 0:
            raise ValueError("error scales must be nonnegative")


# -- quaternion helpers ------------------------------------------------------


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product ``a b`` of (arrays of) SU(2) quaternions along the last axis."""
    a0, av = a[..., :1], a[..., 1:]
    b0, bv = b[..., :1], b[..., 1:]
    c0 = a0 * b0 - np.sum(av * bv, axis=-1, keepdims=True)
    cv = a0 * bv + b0 * av + np.cross(av, bv)
    return np.concatenate([c0, cv], axis=-1)


def unitary_to_quat(U: np.ndarray) -> np.ndarray:
    """Quaternion of ``U / sqrt(det U)``; the overall sign is arbitrary."""
    U = np.asarray(U, dtype=complex)
    V = U / np.sqrt(np.linalg.det(U))
    q = np.array(
        [np.trace(V) / 2, 1j * np.trace(SX @ V) / 2, 1j * np.trace(SY @ V) / 2, 1j * np.trace(SZ @ V) / 2]
    )
    return q.real


def quat_to_unitary(q) -> np.ndarray:
    a0, ax, ay, az = q
    return a0 * np.eye(2) - 1j * (ax * SX + ay * SY + az * SZ)


def free_quats(b: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-i tau b.sigma)`` for each row of ``b``."""
    mag = np.linalg.norm(b, axis=1)
    safe = np.where(mag > 0, mag, 1.0)
    out = np.empty((b.shape[0], 4))
    out[:, 0] = np.cos(mag * tau)
    out[:, 1:] = (np.sin(mag * tau) / safe)[:, None] * b
    return out


def cycle_quats(b: np.ndarray, seq: PulseSequence) -> np.ndarray:
    """Cycle propagator of ``H = b.sigma`` through ``seq`` for each field row."""
    if seq.dim_S != 2 or any(s.P.shape[0] != 2 for s in seq.segments):
        raise ValueError("semiclassical ensembles need a single-qubit sequence")
    c = np.zeros((b.shape[0], 4))
    c[:, 0] = 1.0
    for s in seq.segments:
        if s.tau > 0:
            c = quat_mul(free_quats(b, s.tau), c)
        c = quat_mul(unitary_to_quat(s.P)[None, :], c)
    return c


# -- random fields -----------------------------------------------------------


def sample_fields(spec: RandomFieldSpec) -> np.ndarray:
    """``(n_samples, 3)`` field vectors, drawn in fixed-size chunks.

    Each chunk has its own stream, so the draws do not depend on how the
    work is later split.
    """
    n = spec.n_samples
    if spec.distribution == "fixed-vector":
        return np.tile(np.asarray(spec.vector, dtype=float), (n, 1))
    out = np.empty((n, 3))
    for k, start in enumerate(range(0, n, CHUNK)):
        m = min(CHUNK, n - start)
        g = rng.stream(spec.seed, f"field.{spec.convention}", k)
        if spec.convention == "components":
            out[start : start + m] = g.normal(0.0, spec.B, size=(m, 3))
        else:
            mag = g.normal(0.0, spec.B, size=m)
            u = g.normal(size=(m, 3))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            out[start : start + m] = mag[:, None] * u
    return out


def bloch_vector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    rho = np.outer(psi, psi.conj())
    return np.real([np.trace(rho @ s) for s in (SX, SY, SZ)])


def ensemble_average(
    spec: RandomFieldSpec,
    seq: PulseSequence,
    N_schedule,
    initial_state=(1.0, 0.0),
    state_label: str = "0",
) -> Trajectory:
    """Sample-averaged fidelity over the field ensemble.

    The averaged reduced state is ``(I + <r_N>.sigma)/2``, so its purity is
    ``(1 + |<r_N>|^2)/2``.  Standard errors of the mean fidelity are stored
    in ``metadata["stderr"]``.
    """
    Ns = np.asarray(N_schedule, dtype=np.int64)
    if Ns.size == 0 or np.any(Ns < 0) or np.any(np.diff(Ns) <= 0):
        raise ValueError("schedule must be a nonempty increasing list of N >= 0")
    r = bloch_vector(initial_state)
    b = sample_fields(spec)
    c = cycle_quats(b, seq)
    ls, l2, bs = kernels.ensemble_sums(c, r, Ns)
    n = spec.n_samples
    mean = ls / n
    var = np.maximum(l2 / n - mean**2, 0.0)
    stderr = np.sqrt(var / max(n - 1, 1))
    rbar = bs / n
    purity = np.clip(0.5 * (1 + np.sum(rbar**2, axis=1)), 0.0, 1.0)
    meta = {
        "seed": spec.seed,
        "sequence": seq.label,
        "n_samples": n,
        "N_total": int(Ns[-1]),
        "stderr": stderr,
        "mean_loss": mean,
    }
    return Trajectory(
        Ns, Ns * seq.T_c, np.clip(1 - mean, 0.0, 1.0), purity, state_label, meta
    )


def realization_fidelity(h_x: float, h_y: float, h_z: float, eps: float, N: int, T_c: float) -> float:
    """``1 - eps^2 (h_x^2 + h_y^2) sin^2(N T_c h_z) / (4 h_z^2)``."""
    if abs(h_z) <= 1e-12:
        raise ZeroSplitting("h_z vanishes; the perturbative formula does not apply")
    loss = eps**2 * (h_x**2 + h_y**2) * math.sin(N * T_c * h_z) ** 2 / (4 * h_z**2)
    return min(max(1.0 - loss, 0.0), 1.0)


def asymptotic_forms(B: float, tau: float, N: int, A: float = 0.0, n_B: int = 0) -> dict:
    """Short-time and plateau losses of ZZ in a Gaussian field, and the bath variance."""
    return {
        "short_time_loss": 0.4 * B**4 * N**2 * tau**4,
        "plateau_loss": B**2 * tau**2 / 12,
        "B_sq_from_bath": 0.75 * A**2 * n_B,
    }


# -- ESR imperfect pulses ----------------------------------------------------


def _peaked(g: np.random.Generator, scale: float, size) -> np.ndarray:
    # Inverse CDF of (1/2s)[3(1 - x/s)]^(-1/2) on [-2s, s].
    q = g.random(size)
    return scale * (1 - 3 * (1 - q) ** 2)


def esr_sample_errors(spec: ESRPulseErrorSpec, size=None):
    """Rotation-angle error and the four axis offsets ``(n_y, n_z, m_x, m_z)``.

    The offsets already include the small factor that scales them.
    """
    names = ("eps", "n_y", "n_z", "m_x", "m_z")
    scales = (spec.eps0, spec.n0, spec.n0, spec.n0, spec.n0)
    out = tuple(
        _peaked(rng.stream(spec.seed, f"esr.{nm}"), s, size) for nm, s in zip(names, scales)
    )
    if size is None:
        return tuple(float(x) for x in out)
    return out


def _esr_pulses(eps: float, axes) -> tuple[np.ndarray, np.ndarray]:
    ny, nz, mx, mz = axes
    n = np.array([math.sqrt(1 - ny * ny - nz * nz), ny, nz])
    m = np.array([mx, math.sqrt(1 - mx * mx - mz * mz), mz])
    ang = (math.pi + eps) / 2
    UX = math.cos(ang) * np.eye(2) - 1j * math.sin(ang) * (n[0] * SX + n[1] * SY + n[2] * SZ)
    UY = math.cos(ang) * np.eye(2) - 1j * math.sin(ang) * (m[0] * SX + m[1] * SY + m[2] * SZ)
    return UX, UY


def _esr_cycle_unitary(name: str, eps: float, axes, b_z: float, tau: float) -> np.ndarray:
    UX, UY = _esr_pulses(eps, axes)
    F = np.diag([np.exp(-0.5j * b_z * tau), np.exp(0.5j * b_z * tau)])
    if name == "XYXY":
        pulses = (UX, UY, UX, UY)
    elif name == "XZXZ":
        Z = UY @ UX
        pulses = (UX, Z, UX, Z)
    else:
        raise UnknownName(f"unknown ESR cycle {name!r}")
    U = np.eye(2, dtype=complex)
    for P in pulses:
        U = P @ F @ U
    return U


def _su2_normalize(U: np.ndarray) -> np.ndarray:
    V = U / np.sqrt(np.linalg.det(U))
    return -V if np.trace(V).real < 0 else V


def esr_closed_form(name: str, eps: float, axes, b_z: float, tau: float) -> np.ndarray:
    """Second-order closed-form ``H_c`` of the imperfect XYXY or XZXZ cycle."""
    ny, nz, mx, mz = axes
    T_c = 4 * tau
    s, c = math.sin(b_z * tau), math.cos(b_z * tau)
    if name == "XYXY":
        g = mx + ny
        TH = (
            SZ * (-2 * g + 0.5 * eps**2 * c)
            - 2 * g * ((0.5 * eps * (1 + s) - nz * c) * SX + (mz - 0.5 * eps * c - nz * s) * SY)
        )
    elif name == "XZXZ":
        a = 0.5 * eps * (1 - s) - nz * (1 - c)
        TH = a * SY - a * (-mx * SX + (0.5 * eps * (1 + c) - mz + nz * s) * SZ)
    else:
        raise UnknownName(f"unknown ESR cycle {name!r}")
    return TH / T_c


def esr_effective_cycle(name: str, eps: float, axes, b_z: float, tau: float):
    """Closed-form and numerically exact ``H_c`` for an imperfect ESR cycle.

    ``axes`` is ``(n_y, n_z, m_x, m_z)``.  The free precession between
    pulses is ``exp(-i b_z tau Z / 2)``.  The numeric branch removes the
    global phase before taking the principal logarithm.
    """
    if max(abs(eps), *map(abs, axes)) > ESR_WARN:
        warnings.warn("pulse errors above 0.2; second-order forms are unreliable", stacklevel=2)
    closed = esr_closed_form(name, eps, axes, b_z, tau)
    U = _su2_normalize(_esr_cycle_unitary(name, eps, axes, b_z, tau))
    numeric = principal_log_hamiltonian(U, 4 * tau)
    return closed, numeric


# Truncated second-order polynomials in the five error parameters
# (eps, n_y, n_z, m_x, m_z): a constant, 5 linear and 15 quadratic terms.
_NV = 5
_IU = np.triu_indices(_NV)
_NQ = len(_IU[0])
_QIDX = np.full((_NV, _NV), -1)
_QIDX[_IU] = np.arange(_NQ)
_QIDX[(_IU[1], _IU[0])] = np.arange(_NQ)


def _poly_const(x: float) -> np.ndarray:
    p = np.zeros(1 + _NV + _NQ)
    p[0] = x
    return p


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[0] = a[0] * b[0]
    out[1 : 1 + _NV] = a[0] * b[1 : 1 + _NV] + b[0] * a[1 : 1 + _NV]
    out[1 + _NV :] = a[0] * b[1 + _NV :] + b[0] * a[1 + _NV :]
    outer = np.outer(a[1 : 1 + _NV], b[1 : 1 + _NV])
    sym = outer + outer.T - np.diag(np.diag(outer))
    out[1 + _NV :] += sym[_IU]
    return out


def _poly_eval(p: np.ndarray, x: np.ndarray) -> float:
    return float(p[0] + p[1 : 1 + _NV] @ x + p[1 + _NV :] @ np.outer(x, x)[_IU])


def _pq_mul(a, b):
    # Quaternion product with polynomial components.
    a0, av = a[0], a[1:]
    b0, bv = b[0], b[1:]
    m = _poly_mul
    c0 = m(a0, b0) - m(av[0], bv[0]) - m(av[1], bv[1]) - m(av[2], bv[2])
    cross = [
        m(av[1], bv[2]) - m(av[2], bv[1]),
        m(av[2], bv[0]) - m(av[0], bv[2]),
        m(av[0], bv[1]) - m(av[1], bv[0]),
    ]
    cv = [m(a0, bv[k]) + m(b0, av[k]) + cross[k] for k in range(3)]
    return [c0] + cv


def _pulse_poly(axis: str):
    # U = cos((pi+eps)/2) - i sin((pi+eps)/2) n.sigma to second order.
    def lin(k, coef=1.0):
        p = np.zeros(1 + _NV + _NQ)
        p[1 + k] = coef
        return p

    def quad(i, j, coef):
        p = np.zeros(1 + _NV + _NQ)
        p[1 + _NV + _QIDX[i, j]] = coef
        return p

    a0 = lin(0, -0.5)
    if axis == "X":
        main = _poly_const(1.0) + quad(0, 0, -1 / 8) + quad(1, 1, -0.5) + quad(2, 2, -0.5)
        return [a0, main, lin(1), lin(2)]
    main = _poly_const(1.0) + quad(0, 0, -1 / 8) + quad(3, 3, -0.5) + quad(4, 4, -0.5)
    return [a0, lin(3), main, lin(4)]


def esr_perturbative_form(name: str, eps: float, axes, b_z: float, tau: float) -> np.ndarray:
    """Independent second-order expansion of ``H_c`` by quaternion series.

    Every factor of the cycle is expanded to second order in the five error
    parameters and multiplied with truncation.  The vector part of the
    product equals ``T_c H_c`` up to third-order terms.
    """
    half = 0.5 * b_z * tau
    F = [_poly_const(math.cos(half)), _poly_const(0.0), _poly_const(0.0), _poly_const(math.sin(half))]
    X, Y = _pulse_poly("X"), _pulse_poly("Y")
    if name == "XYXY":
        pulses = (X, Y, X, Y)
    elif name == "XZXZ":
        Z = _pq_mul(Y, X)
        pulses = (X, Z, X, Z)
    else:
        raise UnknownName(f"unknown ESR cycle {name!r}")
    q = [_poly_const(1.0)] + [_poly_const(0.0)] * 3
    for P in pulses:
        q = _pq_mul(P, _pq_mul(F, q))
    x = np.array([eps, *axes], dtype=float)
    sign = 1.0 if q[0][0] >= 0 else -1.0
    v = [sign * _poly_eval(q[k], x) for k in (1, 2, 3)]
    return (v[0] * SX + v[1] * SY + v[2] * SZ) / (4 * tau)


def pauli_components(H: np.ndarray) -> np.ndarray:
    """``(h_x, h_y, h_z)`` with ``H = h0 I + h.sigma``."""
    return np.real([np.trace(H @ s) / 2 for s in (SX, SY, SZ)])


def dominant_axis(H: np.ndarray) -> str:
    return "xyz"[int(np.argmax(np.abs(pauli_components(H))))]
