# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: limited upwind flux differences and all-pairs drift.

Signatures and semantics mirror :mod:`repdiff._fallback` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs, fmin

cnp.import_array()


cdef inline double _mc_slope(double a, double b) noexcept nogil:
    cdef double m
    if a * b <= 0.0:
        return 0.0
    m = fmin(fmin(2.0 * fabs(a), 2.0 * fabs(b)), 0.5 * fabs(a + b))
    return m if a > 0.0 else -m


def upwind_flux_difference(double[:, ::1] rho, double[:, ::1] vface):
    """Return F[i+1/2] - F[i-1/2] along the last (periodic) axis."""
    cdef Py_ssize_t m = rho.shape[0]
    cdef Py_ssize_t n = rho.shape[1]
    out_arr = np.empty((m, n), dtype=np.float64)
    flux_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] flux = flux_arr
    cdef Py_ssize_t r, i, im, ip, ipp
    cdef double v, left, right
    with nogil:
        for r in range(m):
            for i in range(n):
                im = i - 1 if i > 0 else n - 1
                ip = i + 1 if i + 1 < n else 0
                ipp = ip + 1 if ip + 1 < n else 0
                v = vface[r, i]
                if v > 0.0:
                    left = rho[r, i] + 0.5 * _mc_slope(rho[r, i] - rho[r, im],
                                                    rho[r, ip] - rho[r, i])
                    flux[i] = v * left
                elif v < 0.0:
                    right = rho[r, ip] - 0.5 * _mc_slope(rho[r, ip] - rho[r, i],
                                                      rho[r, ipp] - rho[r, ip])
                    flux[i] = v * right
                else:
                    flux[i] = 0.0
            out[r, 0] = flux[0] - flux[n - 1]
            for i in range(1, n):
                out[r, i] = flux[i] - flux[i - 1]
    return out_arr


def pair_drift(double[:, ::1] pos, double period, double[::1] table, double dr):
    """Sum over j of g(|x_i - x_j|) (x_i - x_j) with minimum-image displacements.

    ``g`` is tabulated on r = k*dr and linearly interpolated; beyond the table
    the last entry is used.
    """
    cdef Py_ssize_t npart = pos.shape[0]
    cdef Py_ssize_t d = pos.shape[1]
    cdef Py_ssize_t m = table.shape[0]
    out_arr = np.zeros((npart, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, idx
    cdef double dx[3]
    cdef double r2, r, u, frac, g
    if d > 3:
        raise ValueError("dimension must be at most 3")
    with nogil:
        for i in range(npart):
            for j in range(npart):
                if j == i:
                    continue
                r2 = 0.0
                for k in range(d):
                    dx[k] = pos[i, k] - pos[j, k]
                    dx[k] = dx[k] - period * floor(dx[k] / period + 0.5)
                    r2 = r2 + dx[k] * dx[k]
                if r2 == 0.0:
                    continue
                r = sqrt(r2)
                u = r / dr
                idx = <Py_ssize_t> u
                if idx >= m - 1:
                    g = table[m - 1]
                else:
                    frac = u - idx
                    g = (1.0 - frac) * table[idx] + frac * table[idx + 1]
                for k in range(d):
                    out[i, k] = out[i, k] + g * dx[k]
    return out_arr
