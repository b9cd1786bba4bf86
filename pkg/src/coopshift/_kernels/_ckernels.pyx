# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contracts as the numpy fallback."""
import numpy as np
from libc.math cimport cos, fabs, NAN

cdef enum:
    STATUS_OK = 0
    STATUS_INVALID = 1
    STATUS_ILL_CONDITIONED = 2


def collective_sums(positions, double wavenumber, double amplitude):
    cdef const double[:, ::1] pos = np.ascontiguousarray(positions, dtype=np.float64)
    cdef Py_ssize_t rows = pos.shape[0], m = pos.shape[1], i, a, b
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s, kr
    with nogil:
        for i in range(rows):
            s = 0.0
            for a in range(m):
                for b in range(a + 1, m):
                    kr = wavenumber * fabs(pos[i, a] - pos[i, b])
                    s += cos(kr) / kr
            out[i] = -amplitude * 2.0 * s / m
    return out_arr


def three_point_centers(flux_center, flux_plus, flux_minus,
                        double guess_center, double guess_width, double rel_eps):
    cdef const double[::1] l0 = np.ascontiguousarray(flux_center, dtype=np.float64).ravel()
    cdef const double[::1] lp = np.ascontiguousarray(flux_plus, dtype=np.float64).ravel()
    cdef const double[::1] lm = np.ascontiguousarray(flux_minus, dtype=np.float64).ravel()
    cdef Py_ssize_t n = l0.shape[0], i
    if lp.shape[0] != n or lm.shape[0] != n:
        raise ValueError("flux arrays must have equal length")
    out_arr = np.empty(n, dtype=np.float64)
    status_arr = np.zeros(n, dtype=np.int8)
    cdef double[::1] out = out_arr
    cdef signed char[::1] status = status_arr
    cdef double den, scale
    with nogil:
        for i in range(n):
            if l0[i] <= 0.0:
                out[i] = NAN
                status[i] = STATUS_INVALID
                continue
            den = 2.0 * (lp[i] + lm[i]) - 4.0 * lp[i] * lm[i] / l0[i]
            scale = l0[i]
            if lp[i] > scale:
                scale = lp[i]
            if lm[i] > scale:
                scale = lm[i]
            if fabs(den) <= rel_eps * scale:
                out[i] = NAN
                status[i] = STATUS_ILL_CONDITIONED
                continue
            out[i] = guess_center + 0.5 * guess_width * (lp[i] - lm[i]) / den
    shape = np.shape(flux_center)
    return out_arr.reshape(shape), status_arr.reshape(shape)
