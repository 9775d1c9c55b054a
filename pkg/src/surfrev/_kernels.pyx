# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice kernels; same arithmetic as _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()

BACKEND = "cython"


cdef inline double _cheb01(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t n = c.shape[0], i
    cdef double y = -1.0 + 2.0 * x
    cdef double y2, c0, c1, tmp
    if n == 1:
        return c[0]
    y2 = 2.0 * y
    c0 = c[n - 2]
    c1 = c[n - 1]
    for i in range(3, n + 1):
        tmp = c0
        c0 = c[n - i] - c1
        c1 = tmp + c1 * y2
    return c0 + c1 * y


cdef inline double _norm(const double[::1] rho, double p1, double p2) noexcept nogil:
    cdef double r = fabs(p2) / p1
    if r > 1.0:
        r = 1.0
    return p1 * _cheb01(rho, r)


def cheb01(const double[::1] coef, x):
    xa = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(xa)
    cdef double[::1] xv = xa.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _cheb01(coef, xv[i])
    return out if out.ndim else float(out)


def norm_at(const double[::1] rho, p1, p2):
    a, b = np.broadcast_arrays(np.asarray(p1, dtype=np.float64), np.asarray(p2, dtype=np.float64))
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    out = np.empty(a.shape)
    cdef double[::1] av = a.reshape(-1)
    cdef double[::1] bv = b.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            ov[i] = _norm(rho, av[i], bv[i])
    return out if out.ndim else float(out)


def column_counts(const double[::1] rho, const double[::1] g, double R, long l0, long l1):
    cdef Py_ssize_t n = max(l1 - l0, 0), i
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    cdef long l, k
    cdef double lf, u
    with nogil:
        for i in range(n):
            l = l0 + i
            lf = <double>l
            u = lf / R
            if u > 1.0:
                u = 1.0
            k = <long>floor(R * _cheb01(g, u) - 0.5)
            if k < l - 1:
                k = l - 1
            while k >= l and _norm(rho, k + 0.5, lf) > R:
                k -= 1
            while _norm(rho, k + 1.5, lf) <= R:
                k += 1
            ov[i] = k - l + 1 if k >= l else 0
    return out


def fill_norms(const double[::1] rho, counts, long l0):
    cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef cnp.int64_t[::1] cv = cnt
    cdef Py_ssize_t total = int(cnt.sum()), i, j, pos = 0
    out = np.empty(total)
    cdef double[::1] ov = out
    cdef long l
    with nogil:
        for i in range(cv.shape[0]):
            l = l0 + i
            for j in range(cv[i]):
                ov[pos] = _norm(rho, l + j + 0.5, <double>l)
                pos += 1
    return out
