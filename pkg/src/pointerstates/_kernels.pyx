# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: MET geometric factors and the SU(2) ensemble sums."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, sin, sqrt

cnp.import_array()

PHASE_TOL = 1e-12


def geometric_factors(phi, long N):
    cdef double[::1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i, j
    out = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] g = out
    cdef double d, dr, di, nr, ni, den
    for i in range(n):
        for j in range(n):
            d = p[j] - p[i]
            dr = 1.0 - cos(d)
            di = -sin(d)
            if sqrt(dr * dr + di * di) < PHASE_TOL:
                g[i, j] = 1.0
                continue
            nr = 1.0 - cos(N * d)
            ni = -sin(N * d)
            # (nr + i ni) / (N (dr + i di))
            den = N * (dr * dr + di * di)
            g[i, j] = ((nr * dr + ni * di) + 1j * (ni * dr - nr * di)) / den
    return out


cdef inline void _kahan(double *s, double *comp, double x) noexcept nogil:
    cdef double y = x - comp[0]
    cdef double t = s[0] + y
    comp[0] = (t - s[0]) - y
    s[0] = t


def ensemble_sums(c, r, Ns):
    cdef double[:, ::1] q = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef long long[::1] nn = np.ascontiguousarray(Ns, dtype=np.int64)
    cdef Py_ssize_t ns = q.shape[0], m = nn.shape[0], i, k
    # per-sample rotation data: angle, axis, axis x r, |axis x r|^2, axis . r
    geo = np.empty((ns, 9))
    cdef double[:, ::1] G = geo
    loss_sum = np.zeros(m)
    loss2_sum = np.zeros(m)
    bloch_sum = np.zeros((m, 3))
    cdef double[::1] ls = loss_sum
    cdef double[::1] l2 = loss2_sum
    cdef double[:, ::1] bs = bloch_sum
    cdef double sg, c0, vx, vy, vz, s, nx, ny, nz, px, py, pz
    cdef double acc[5]
    cdef double comp[5]
    cdef double a, sn, cn, ca, sa, loss, w
    cdef int j
    with nogil:
        for i in range(ns):
            sg = -1.0 if q[i, 0] < 0 else 1.0
            c0 = sg * q[i, 0]
            vx = sg * q[i, 1]
            vy = sg * q[i, 2]
            vz = sg * q[i, 3]
            s = sqrt(vx * vx + vy * vy + vz * vz)
            if s > 0:
                nx = vx / s
                ny = vy / s
                nz = vz / s
            else:
                nx = 0.0
                ny = 0.0
                nz = 0.0
            px = ny * rv[2] - nz * rv[1]
            py = nz * rv[0] - nx * rv[2]
            pz = nx * rv[1] - ny * rv[0]
            G[i, 0] = atan2(s, c0)
            G[i, 1] = nx
            G[i, 2] = ny
            G[i, 3] = nz
            G[i, 4] = px
            G[i, 5] = py
            G[i, 6] = pz
            G[i, 7] = px * px + py * py + pz * pz
            G[i, 8] = nx * rv[0] + ny * rv[1] + nz * rv[2]
        for k in range(m):
            for j in range(5):
                acc[j] = 0.0
                comp[j] = 0.0
            for i in range(ns):
                a = nn[k] * G[i, 0]
                sn = sin(a)
                cn = cos(a)
                ca = 1.0 - 2.0 * sn * sn
                sa = 2.0 * sn * cn
                loss = sn * sn * G[i, 7]
                w = G[i, 8] * (1.0 - ca)
                _kahan(&acc[0], &comp[0], loss)
                _kahan(&acc[1], &comp[1], loss * loss)
                _kahan(&acc[2], &comp[2], rv[0] * ca + G[i, 4] * sa + G[i, 1] * w)
                _kahan(&acc[3], &comp[3], rv[1] * ca + G[i, 5] * sa + G[i, 2] * w)
                _kahan(&acc[4], &comp[4], rv[2] * ca + G[i, 6] * sa + G[i, 3] * w)
            ls[k] = acc[0]
            l2[k] = acc[1]
            bs[k, 0] = acc[2]
            bs[k, 1] = acc[3]
            bs[k, 2] = acc[4]
    return loss_sum, loss2_sum, bloch_sum
