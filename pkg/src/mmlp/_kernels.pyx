# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_fallback``; same signatures."""

from libc.math cimport hypot, sqrt, log, fabs

NAME = "cython"


cdef inline void _sz1(double w, double two_sqrt, double rhomu,
                      double* s, double* z) nogil:
    cdef double big = 0.5 * (hypot(w, two_sqrt) + fabs(w))
    if w < 0:
        s[0] = big
        z[0] = rhomu / big
    else:
        s[0] = rhomu / big
        z[0] = big


def sz(const double[::1] w, double rhomu, double[::1] s, double[::1] z):
    cdef Py_ssize_t i, n = w.shape[0]
    cdef double two_sqrt = 2.0 * sqrt(rhomu)
    with nogil:
        for i in range(n):
            _sz1(w[i], two_sqrt, rhomu, &s[i], &z[i])


def evaluate(const double[:, ::1] A, const double[::1] b, const double[::1] c,
             const double[::1] x, const double[::1] y, double mu, double rho,
             double[::1] g, double[::1] r):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], i, j
    cdef double rhomu = rho * mu
    cdef double two_sqrt = 2.0 * sqrt(rhomu)
    cdef double a, rx, w, si, zi, total = 0.0, by = 0.0
    with nogil:
        for j in range(m):
            g[j] = -rho * b[j]
            by += b[j] * y[j]
        for i in range(n):
            a = -c[i]
            for j in range(m):
                a += A[j, i] * y[j]
            rx = rho * x[i]
            w = a + rx
            _sz1(w, two_sqrt, rhomu, &si, &zi)
            if w < 0:
                r[i] = zi - rx
            else:
                r[i] = si + a
            for j in range(m):
                g[j] += A[j, i] * zi
            total += -rhomu * log(si) + 0.5 * r[i] * (zi + rx)
    return -rho * by + total


def cho_solve(const double[:, ::1] L, const double[::1] rhs, double[::1] out):
    cdef Py_ssize_t m = L.shape[0], i, k
    cdef double acc
    with nogil:
        # L u = rhs
        for i in range(m):
            acc = rhs[i]
            for k in range(i):
                acc -= L[i, k] * out[k]
            out[i] = acc / L[i, i]
        # L' d = u
        for i in range(m - 1, -1, -1):
            acc = out[i]
            for k in range(i + 1, m):
                acc -= L[k, i] * out[k]
            out[i] = acc / L[i, i]
