# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration loops. Same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef inline void _rhs(const double* r, const double* x, double* out) noexcept nogil:
    cdef double Pi = r[0], beta = r[1], sigma = r[2], nu = r[3]
    cdef double g1 = r[4], g2 = r[5], g3 = r[6], g4 = r[7]
    cdef double tau = r[8], t1 = r[9], t2 = r[10], t3 = r[11], t4 = r[12]
    cdef double f1 = r[13], f2 = r[14]
    cdef double s = x[0], i = x[1], ip = x[2], i_n = x[3], ic = x[4], rr = x[5], d = x[6]
    cdef double n = s + i + ip + i_n + ic + rr + d
    cdef double f = 0.0
    if n != 0.0:
        f = beta * s * i / n
    out[0] = Pi - f - sigma * s - nu * s
    out[1] = f - g1 * i - g2 * i - g3 * i - g4 * i - t1 * i - nu * i
    out[2] = g1 * i - t3 * ip - nu * ip
    out[3] = g2 * i - t2 * i_n - f1 * i_n - nu * i_n
    out[4] = g3 * i - t4 * ic - f2 * ic - nu * ic
    out[5] = t1 * i + t2 * i_n + t3 * ip + t4 * ic - tau * rr - nu * rr
    out[6] = sigma * s + f1 * i_n + f2 * ic + g4 * i + tau * rr - nu * d


cdef inline bint _row_finite(const double* x) noexcept nogil:
    cdef int k
    for k in range(7):
        if not isfinite(x[k]):
            return False
    return True


def run_rk4(rates, x0, double h, Py_ssize_t n_steps):
    cdef double[::1] r = np.ascontiguousarray(rates, dtype=np.float64)
    y_arr = np.empty((n_steps + 1, 7))
    cdef double[:, ::1] y = y_arr
    cdef double x[7]
    cdef double tmp[7]
    cdef double k1[7]
    cdef double k2[7]
    cdef double k3[7]
    cdef double k4[7]
    cdef double h2 = 0.5 * h, h6 = h / 6.0
    cdef Py_ssize_t n, k
    for k in range(7):
        x[k] = float(x0[k])
        y[0, k] = x[k]
    with nogil:
        for n in range(n_steps):
            _rhs(&r[0], x, k1)
            for k in range(7):
                tmp[k] = x[k] + h2 * k1[k]
            _rhs(&r[0], tmp, k2)
            for k in range(7):
                tmp[k] = x[k] + h2 * k2[k]
            _rhs(&r[0], tmp, k3)
            for k in range(7):
                tmp[k] = x[k] + h * k3[k]
            _rhs(&r[0], tmp, k4)
            for k in range(7):
                x[k] = x[k] + h6 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                y[n + 1, k] = x[k]
            if not _row_finite(x):
                with gil:
                    return y_arr[: n + 2], n + 1
    return y_arr, -1


def run_ffconv(rates, x0, Py_ssize_t n_steps, c, b, double coef, double lead, ffac):
    cdef double[::1] r = np.ascontiguousarray(rates, dtype=np.float64)
    cdef double[::1] cw = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] bw = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] ff = np.ascontiguousarray(ffac, dtype=np.float64)
    y_arr = np.empty((n_steps + 1, 7))
    F_arr = np.empty((n_steps + 1, 7))
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] F = F_arr
    cdef double init[7]
    cdef double acc[7]
    cdef double w
    cdef Py_ssize_t n, j, k
    for k in range(7):
        init[k] = float(x0[k])
        y[0, k] = init[k]
    with nogil:
        for n in range(n_steps):
            _rhs(&r[0], &y[n, 0], &F[n, 0])
            for k in range(7):
                F[n, k] = F[n, k] * ff[n]
                acc[k] = 0.0
            for j in range(n + 1):
                w = cw[n - j]
                for k in range(7):
                    acc[k] += w * F[j, k]
            for k in range(7):
                acc[k] -= bw[n] * F[0, k]
                y[n + 1, k] = init[k] + lead * F[n, k] + coef * acc[k]
            if not _row_finite(&y[n + 1, 0]):
                with gil:
                    return y_arr[: n + 2], n + 1
    return y_arr, -1


def run_ffe(rates, x0, double h, Py_ssize_t n_steps, ffac, double alpha, double m_norm):
    cdef double[::1] r = np.ascontiguousarray(rates, dtype=np.float64)
    cdef double[::1] ff = np.ascontiguousarray(ffac, dtype=np.float64)
    y_arr = np.empty((n_steps + 1, 7))
    cdef double[:, ::1] y = y_arr
    cdef double x[7]
    cdef double fn[7]
    cdef double fp[7]
    cdef double mem = (1.0 - alpha) / m_norm
    cdef double w1 = alpha / m_norm * (1.5 * h)
    cdef double w0 = alpha / m_norm * (0.5 * h)
    cdef Py_ssize_t n, k
    for k in range(7):
        x[k] = float(x0[k])
        y[0, k] = x[k]
    with nogil:
        for n in range(n_steps):
            _rhs(&r[0], x, fn)
            for k in range(7):
                fn[k] = ff[n] * fn[k]
                if n == 0:
                    fp[k] = fn[k]
            for k in range(7):
                x[k] = x[k] + mem * (fn[k] - fp[k]) + (w1 * fn[k] - w0 * fp[k])
                y[n + 1, k] = x[k]
                fp[k] = fn[k]
            if not _row_finite(x):
                with gil:
                    return y_arr[: n + 2], n + 1
    return y_arr, -1
