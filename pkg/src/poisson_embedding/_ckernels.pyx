# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of ``_pykernels``; see that module for the contracts."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

from .errors import ZeroIncrementError

cnp.import_array()


def inflection_indices(values):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i, count = 0
    out_arr = np.empty(max(n - 2, 0), dtype=np.intp)
    cdef Py_ssize_t[::1] out = out_arr
    cdef double prev, cur
    if n < 2:
        return out_arr[:0]
    prev = v[1] - v[0]
    if prev == 0.0:
        raise ZeroIncrementError("walk increment 1 is exactly zero")
    for i in range(1, n - 1):
        cur = v[i + 1] - v[i]
        if cur == 0.0:
            raise ZeroIncrementError(f"walk increment {i + 1} is exactly zero")
        if (prev > 0.0) != (cur > 0.0):
            out[count] = i
            count += 1
        prev = cur
    return out_arr[:count]


cdef inline Py_ssize_t _advance(const double[::1] knots, Py_ssize_t j, double t) noexcept nogil:
    cdef Py_ssize_t m = knots.shape[0]
    while j + 1 < m and knots[j + 1] <= t:
        j += 1
    return j


def eval_piecewise(knots, knot_values, slopes, t):
    cdef const double[::1] kn = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(knot_values, dtype=np.float64)
    cdef const double[::1] sl = np.ascontiguousarray(slopes, dtype=np.float64)
    t_arr = np.asarray(t, dtype=np.float64)
    flat = np.ascontiguousarray(t_arr.ravel())
    cdef const double[::1] tt = flat
    cdef Py_ssize_t n = tt.shape[0], i, j = 0
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef bint ascending = True
    for i in range(1, n):
        if tt[i] < tt[i - 1]:
            ascending = False
            break
    if not ascending:
        # unsorted queries: fall back to bisection for the segment lookup
        idx = np.searchsorted(np.asarray(kn), flat, side="right") - 1
        return (np.asarray(kv)[idx] + np.asarray(sl)[idx] * (flat - np.asarray(kn)[idx])).reshape(t_arr.shape)
    with nogil:
        for i in range(n):
            j = _advance(kn, j, tt[i])
            out[i] = kv[j] + sl[j] * (tt[i] - kn[j])
    return out_arr.reshape(t_arr.shape)


def sup_abs_gap(knots, knot_values, slopes, mesh_t, mesh_v, double t_max):
    cdef const double[::1] kn = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(knot_values, dtype=np.float64)
    cdef const double[::1] sl = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef const double[::1] mt = np.ascontiguousarray(mesh_t, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(mesh_v, dtype=np.float64)
    cdef Py_ssize_t n = mt.shape[0], i, j = 0, best_i = 0
    cdef double best = -1.0, gap, f
    with nogil:
        for i in range(n):
            if mt[i] > t_max:
                break
            j = _advance(kn, j, mt[i])
            f = kv[j] + sl[j] * (mt[i] - kn[j])
            gap = fabs(f - mv[i])
            if gap > best:
                best = gap
                best_i = i
    return float(best), int(best_i)


def max_abs_centered(spacings):
    cdef const double[:, ::1] s = np.ascontiguousarray(spacings, dtype=np.float64)
    cdef Py_ssize_t r = s.shape[0], k = s.shape[1], a, i
    out_arr = np.empty(r, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double tau, dev, best, kd = <double>k
    with nogil:
        for a in range(r):
            tau = 0.0
            best = 0.0
            for i in range(k):
                tau = tau + s[a, i]
                dev = fabs(tau - (<double>(i + 1)) / kd)
                if dev > best:
                    best = dev
            out[a] = best
    return out_arr


def ks_two_sample_sorted(a, b):
    cdef const double[::1] x = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = x.shape[0], nb = y.shape[0], i = 0, j = 0
    cdef double da = <double>na, db = <double>nb, v, d, best = 0.0
    with nogil:
        while i < na or j < nb:
            if j >= nb or (i < na and x[i] <= y[j]):
                v = x[i]
            else:
                v = y[j]
            while i < na and x[i] <= v:
                i += 1
            while j < nb and y[j] <= v:
                j += 1
            d = fabs(i / da - j / db)
            if d > best:
                best = d
    return float(best)
