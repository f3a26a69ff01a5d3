# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels (see ``_kernels_py`` for reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, ceil
from libc.math cimport sqrt as csqrt

cnp.import_array()


def convolution_recursion(g, kern, coef, strength):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] gg = np.ascontiguousarray(g, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] kk = np.ascontiguousarray(kern, dtype=np.complex128)
    cdef Py_ssize_t n_max = gg.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.zeros(n_max + 1, dtype=np.complex128)
    cdef double complex cf = coef
    cdef double complex st = strength
    cdef double complex acc
    cdef Py_ssize_t n, l
    for n in range(1, n_max + 1):
        acc = 0
        for l in range(1, n):
            acc = acc + c[l] * kk[n - l]
        c[n] = cf * (gg[n] + st * acc)
    return c


def polylog_series(double s, z, double tol=1e-17, Py_ssize_t max_terms=200000):
    zz = np.asarray(z, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] flat = np.ascontiguousarray(zz.ravel())
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(flat.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i, n, n_terms, n_top = 0
    cdef double complex zi, power, acc
    cdef double r, r_max = 0.0
    for i in range(flat.shape[0]):
        r = csqrt(flat[i].real * flat[i].real + flat[i].imag * flat[i].imag)
        if r > r_max:
            r_max = r
    if r_max == 0.0:
        return out.reshape(zz.shape)
    # same term count for every point as the numpy version
    if r_max < 1.0:
        n_top = <Py_ssize_t> ceil(log(tol) / log(r_max)) + 2
        if n_top < 8:
            n_top = 8
        if n_top > max_terms:
            n_top = max_terms
    else:
        n_top = max_terms
    cdef cnp.ndarray[cnp.float64_t, ndim=1] weights = np.arange(1, n_top + 1, dtype=np.float64) ** (-s)
    for i in range(flat.shape[0]):
        zi = flat[i]
        power = zi
        acc = 0
        for n in range(n_top):
            acc = acc + power * weights[n]
            power = power * zi
        out[i] = acc
    return out.reshape(zz.shape)
