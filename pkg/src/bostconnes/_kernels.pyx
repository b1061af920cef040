# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled series kernels (same contracts as _kernels_py).

Sums use Neumaier compensation in a fixed index order so results are
reproducible run to run.
"""
from libc.math cimport pow, exp, log, cos, sin, M_PI
from libc.stdlib cimport malloc, free


cdef inline void _neumaier(double x, double *s, double *c) nogil:
    cdef double t = s[0] + x
    if abs(s[0]) >= abs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def power_sum(double beta, long stop, long start=1):
    cdef double s = 0.0, c = 0.0
    cdef long n
    with nogil:
        for n in range(start, stop + 1):
            _neumaier(pow(<double>n, -beta), &s, &c)
    return s + c, s + c


cdef double* _table(long b, bint use_sin):
    cdef double *t = <double*>malloc(b * sizeof(double))
    cdef long j
    for j in range(b):
        # libm cos/sin of the same argument Python's math module uses
        t[j] = sin(2.0 * M_PI * j / b) if use_sin else cos(2.0 * M_PI * j / b)
    return t


def twisted_power_sum(double beta, long stop, long k, long b):
    cdef double *ct = _table(b, False)
    cdef double *st = _table(b, True)
    cdef double rs = 0.0, rc = 0.0, is_ = 0.0, ic = 0.0, ws = 0.0, wc = 0.0, w
    cdef long n, j
    try:
        with nogil:
            for n in range(1, stop + 1):
                w = pow(<double>n, -beta)
                j = (k * n) % b
                _neumaier(w * ct[j], &rs, &rc)
                _neumaier(w * st[j], &is_, &ic)
                _neumaier(w, &ws, &wc)
    finally:
        free(ct)
        free(st)
    return rs + rc, is_ + ic, ws + wc


def log_spectrum_gibbs(double beta, long stop, long k, long b):
    cdef double *ct = _table(b, False)
    cdef double *st = _table(b, True)
    cdef double zs = 0.0, zc = 0.0, rs = 0.0, rc = 0.0, is_ = 0.0, ic = 0.0, w
    cdef long n, j
    try:
        with nogil:
            for n in range(1, stop + 1):
                w = exp(-beta * log(<double>n))
                j = (k * n) % b
                _neumaier(w, &zs, &zc)
                _neumaier(w * ct[j], &rs, &rc)
                _neumaier(w * st[j], &is_, &ic)
    finally:
        free(ct)
        free(st)
    return zs + zc, rs + rc, is_ + ic
