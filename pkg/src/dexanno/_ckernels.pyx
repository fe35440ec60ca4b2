# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``.

Same algorithms, same pivoting rule, same tolerances: results agree with
the fallback to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, M_PI, INFINITY

cnp.import_array()

LP_OPTIMAL = 0
LP_INFEASIBLE = 1
LP_UNBOUNDED = 2


cdef inline void _cross(double* a, double* b, double* out) nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef void _tangent_basis(double* n, double* t1, double* t2) nogil:
    cdef int k = 0, j
    cdef double best = fabs(n[0]), nrm
    cdef double r[3]
    for j in range(1, 3):
        if fabs(n[j]) < best:
            best = fabs(n[j])
            k = j
    r[0] = 0.0
    r[1] = 0.0
    r[2] = 0.0
    r[k] = 1.0
    _cross(n, r, t1)
    nrm = sqrt(t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2])
    for j in range(3):
        t1[j] /= nrm
    _cross(n, t1, t2)


def tangent_basis(n):
    cdef double[::1] nv = np.ascontiguousarray(n, dtype=np.float64)
    t1 = np.empty(3)
    t2 = np.empty(3)
    cdef double[::1] a = t1
    cdef double[::1] b = t2
    _tangent_basis(&nv[0], &a[0], &b[0])
    return t1, t2


def wrench_columns(points, normals, half_angles, int m, double torque_scale=1.0):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] N = np.ascontiguousarray(normals, dtype=np.float64)
    cdef double[::1] H = np.ascontiguousarray(half_angles, dtype=np.float64)
    cdef Py_ssize_t nc = P.shape[0]
    out = np.empty((6, nc * m))
    cdef double[:, ::1] G = out
    cdef double t1[3]
    cdef double t2[3]
    cdef double w[3]
    cdef double tq[3]
    cdef double ct, st, phi, cp, sp
    cdef Py_ssize_t i, j, d, col
    with nogil:
        for i in range(nc):
            _tangent_basis(&N[i, 0], t1, t2)
            ct = cos(H[i])
            st = sin(H[i])
            for j in range(m):
                phi = 2.0 * M_PI * j / m
                cp = cos(phi)
                sp = sin(phi)
                for d in range(3):
                    w[d] = ct * N[i, d] + st * (cp * t1[d] + sp * t2[d])
                _cross(&P[i, 0], w, tq)
                col = i * m + j
                for d in range(3):
                    G[d, col] = w[d]
                    G[3 + d, col] = tq[d] / torque_scale
    return out


cdef void _pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c) nogil:
    cdef Py_ssize_t i, j, rows = T.shape[0], cols = T.shape[1]
    cdef double p = T[r, c], f
    for j in range(cols):
        T[r, j] /= p
    for i in range(rows):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(cols):
                T[i, j] -= f * T[r, j]


cdef int _run(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t m, Py_ssize_t ncols,
              double tol, int max_iter) nogil:
    cdef Py_ssize_t i, j, enter, leave
    cdef Py_ssize_t last = T.shape[1] - 1
    cdef double a, ratio, best
    cdef int it
    for it in range(max_iter):
        enter = -1
        for j in range(ncols):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return 0
        leave = -1
        best = INFINITY
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                ratio = T[i, last] / a
                if ratio < best - tol or (fabs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return 2
        _pivot(T, leave, enter)
        basis[leave] = enter
    return -1


def lp_max(A, b, c, double tol=1e-11, double feas_tol=1e-9, int max_iter=10000):
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j, mk, k
    cdef int status

    T_arr = np.zeros((m + 1, n + m + 1))
    cdef double[:, ::1] T = T_arr
    cdef double[:, ::1] Av = A
    cdef double[::1] bv = b
    cdef double sgn
    for i in range(m):
        sgn = -1.0 if bv[i] < 0 else 1.0
        for j in range(n):
            T[i, j] = sgn * Av[i, j]
            T[m, j] -= sgn * Av[i, j]
        T[i, n + i] = 1.0
        T[i, n + m] = sgn * bv[i]
        T[m, n + m] -= sgn * bv[i]
    basis_arr = np.arange(n, n + m, dtype=np.intp)
    cdef Py_ssize_t[::1] basis = basis_arr

    with nogil:
        status = _run(T, basis, m, n + m, tol, max_iter)
    if status < 0:
        raise RuntimeError("simplex iteration limit reached")
    if -T[m, n + m] > feas_tol:
        return LP_INFEASIBLE, np.zeros(n), 0.0

    keep = []
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if fabs(T[i, j]) > tol:
                    _pivot(T, i, j)
                    basis[i] = j
                    break
        if basis[i] < n:
            keep.append(i)
    mk = len(keep)
    T2_arr = np.zeros((mk + 1, n + 1))
    cdef double[:, ::1] T2 = T2_arr
    basis2_arr = np.empty(mk, dtype=np.intp)
    cdef Py_ssize_t[::1] basis2 = basis2_arr
    for k in range(mk):
        i = keep[k]
        for j in range(n):
            T2[k, j] = T[i, j]
        T2[k, n] = T[i, n + m]
        basis2[k] = basis[i]
    for j in range(n):
        T2[mk, j] = -cv[j]
    cdef double f
    for k in range(mk):
        f = T2[mk, basis2[k]]
        if f != 0.0:
            for j in range(n + 1):
                T2[mk, j] -= f * T2[k, j]

    with nogil:
        status = _run(T2, basis2, mk, n, tol, max_iter)
    if status < 0:
        raise RuntimeError("simplex iteration limit reached")
    x = np.zeros(n)
    cdef double[::1] xv = x
    for k in range(mk):
        xv[basis2[k]] = T2[k, n]
    if status != 0:
        return LP_UNBOUNDED, x, np.inf
    cdef double obj = 0.0
    for j in range(n):
        obj += cv[j] * xv[j]
    return LP_OPTIMAL, x, obj
