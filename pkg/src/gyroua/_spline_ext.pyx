# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled quintic B-spline scatter/gather on a periodic 2D grid."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline void _weights(double f, double* w) noexcept nogil:
    # Quintic B-spline weights at node offsets -2..3 for fractional position f in [0, 1).
    cdef double g = 1.0 - f
    cdef double f5 = f * f * f * f * f
    cdef double g5 = g * g * g * g * g
    cdef double a, b, c, d
    a = 2.0 - f
    b = 1.0 + f
    c = 3.0 - f
    d = 2.0 + f
    w[0] = g5 / 120.0
    w[1] = (a * a * a * a * a - 6.0 * g5) / 120.0
    w[2] = (c * c * c * c * c - 6.0 * a * a * a * a * a + 15.0 * g5) / 120.0
    w[3] = (d * d * d * d * d - 6.0 * b * b * b * b * b + 15.0 * f5) / 120.0
    w[4] = (b * b * b * b * b - 6.0 * f5) / 120.0
    w[5] = f5 / 120.0


def deposit(double[::1] x1, double[::1] x2, double[::1] w,
            int nx1, int nx2, double dx1, double dx2):
    """Scatter weights onto nodes; returns the (nx1, nx2) sum of w * S(x_node - x)."""
    cdef Py_ssize_t n = x1.shape[0]
    out_arr = np.zeros((nx1, nx2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double wx[6]
    cdef double wy[6]
    cdef Py_ssize_t p, a, b
    cdef double xi, eta, fx, fy, wa
    cdef long i0, j0, ii, jj
    with nogil:
        for p in range(n):
            xi = x1[p] / dx1
            eta = x2[p] / dx2
            i0 = <long>floor(xi)
            j0 = <long>floor(eta)
            fx = xi - i0
            fy = eta - j0
            _weights(fx, wx)
            _weights(fy, wy)
            for a in range(6):
                ii = (i0 - 2 + a) % nx1
                if ii < 0:
                    ii += nx1
                wa = w[p] * wx[a]
                for b in range(6):
                    jj = (j0 - 2 + b) % nx2
                    if jj < 0:
                        jj += nx2
                    out[ii, jj] += wa * wy[b]
    return out_arr


def gather(double[::1] x1, double[::1] x2, double[:, :, ::1] grids,
           double dx1, double dx2):
    """Interpolate each of the stacked (m, nx1, nx2) grids at the points; returns (m, n)."""
    cdef Py_ssize_t n = x1.shape[0]
    cdef Py_ssize_t m = grids.shape[0]
    cdef long nx1 = grids.shape[1]
    cdef long nx2 = grids.shape[2]
    out_arr = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double wx[6]
    cdef double wy[6]
    cdef Py_ssize_t p, a, b, c
    cdef double xi, eta, fx, fy, wab
    cdef long i0, j0, ii, jj
    with nogil:
        for p in range(n):
            xi = x1[p] / dx1
            eta = x2[p] / dx2
            i0 = <long>floor(xi)
            j0 = <long>floor(eta)
            fx = xi - i0
            fy = eta - j0
            _weights(fx, wx)
            _weights(fy, wy)
            for a in range(6):
                ii = (i0 - 2 + a) % nx1
                if ii < 0:
                    ii += nx1
                for b in range(6):
                    jj = (j0 - 2 + b) % nx2
                    if jj < 0:
                        jj += nx2
                    wab = wx[a] * wy[b]
                    for c in range(m):
                        out[c, p] += wab * grids[c, ii, jj]
    return out_arr
