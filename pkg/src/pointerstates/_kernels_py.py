"""Pure numpy versions of the compiled kernels (same signatures and results)."""

from __future__ import annotations

import numpy as np

PHASE_TOL = 1e-12


def geometric_factors(phi: np.ndarray, N: int) -> np.ndarray:
    """``g_ij = (1 - x^N) / (N (1 - x))`` with ``x = exp(i (phi_j - phi_i))``.

    Entries with ``|1 - x| < PHASE_TOL`` are 1.
    """
    phi = np.asarray(phi, dtype=float)
    dphi = phi[None, :] - phi[:, None]
    x = np.exp(1j * dphi)
    den = 1 - x
    flat = np.abs(den) < PHASE_TOL
    safe = np.where(flat, 1.0, den)
    g = (1 - np.exp(1j * N * dphi)) / (N * safe)
    return np.where(flat, 1.0 + 0j, g)


def ensemble_sums(c: np.ndarray, r: np.ndarray, Ns: np.ndarray):
    """Per-N sums over samples of loss, loss squared and Bloch vector.

    ``c`` holds one SU(2) cycle quaternion ``(c0, cx, cy, cz)`` per row with
    ``U_c = c0 - i c.sigma``.  ``r`` is the initial Bloch vector.
    """
    c = np.asarray(c, dtype=float)
    r = np.asarray(r, dtype=float)
    Ns = np.asarray(Ns, dtype=np.int64)
    sgn = np.where(c[:, 0] < 0, -1.0, 1.0)
    c0 = c[:, 0] * sgn
    v = c[:, 1:] * sgn[:, None]
    s = np.linalg.norm(v, axis=1)
    theta = np.arctan2(s, c0)
    nz = s > 0
    n = np.zeros_like(v)
    n[nz] = v[nz] / s[nz, None]
    nxr = np.cross(n, r)
    perp2 = np.sum(nxr**2, axis=1)
    ndr = n @ r

    m = Ns.size
    loss_sum = np.empty(m)
    loss2_sum = np.empty(m)
    bloch_sum = np.empty((m, 3))
    for k, N in enumerate(Ns):
        a = 2.0 * N * theta
        ca, sa = np.cos(a), np.sin(a)
        loss = np.sin(N * theta) ** 2 * perp2
        loss_sum[k] = np.sum(loss)
        loss2_sum[k] = np.sum(loss * loss)
        rN = r[None, :] * ca[:, None] + nxr * sa[:, None] + n * (ndr * (1 - ca))[:, None]
        bloch_sum[k] = rN.sum(axis=0)
    return loss_sum, loss2_sum, bloch_sum
