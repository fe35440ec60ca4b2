"""Pure-Python/numpy versions of the hot kernels.

These mirror ``_ckernels.pyx`` step for step; ``dexanno._backend`` picks
the compiled module when it imports and falls back to this one otherwise.
"""

import numpy as np

LP_OPTIMAL = 0
LP_INFEASIBLE = 1
LP_UNBOUNDED = 2

_AXES = np.eye(3)


def tangent_basis(n):
    """Right-handed (t1, t2) orthogonal to unit ``n``.

    The reference axis is the world axis least aligned with ``n``; ties go
    to the lower axis index.
    """
    k = 0
    best = abs(n[0])
    for j in (1, 2):
        if abs(n[j]) < best:
            best = abs(n[j])
            k = j
    t1 = np.cross(n, _AXES[k])
    t1 /= np.sqrt(t1 @ t1)
    t2 = np.cross(n, t1)
    return t1, t2


def wrench_columns(points, normals, half_angles, m, torque_scale=1.0):
    """Stack ``[w; p x w / torque_scale]`` for every cone edge of every contact."""
    points = np.asarray(points, dtype=float)
    normals = np.asarray(normals, dtype=float)
    nc = points.shape[0]
    G = np.empty((6, nc * m))
    phi = 2.0 * np.pi * np.arange(m) / m
    cphi, sphi = np.cos(phi), np.sin(phi)
    for i in range(nc):
        n = normals[i]
        t1, t2 = tangent_basis(n)
        ct, st = np.cos(half_angles[i]), np.sin(half_angles[i])
        w = ct * n[:, None] + st * (np.outer(t1, cphi) + np.outer(t2, sphi))
        G[:3, i * m : (i + 1) * m] = w
        G[3:, i * m : (i + 1) * m] = np.cross(points[i], w.T).T / torque_scale
    return G


def _pivot(T, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T, basis, ncols, tol, max_iter):
    """Bland's-rule simplex on a minimisation tableau; last row = reduced costs."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        enter = -1
        for j in range(ncols):
            if T[m, j] < -tol:
                enter = j
                break
        if enter < 0:
            return LP_OPTIMAL
        leave = -1
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                ratio = T[i, -1] / a
                if ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return LP_UNBOUNDED
        _pivot(T, leave, enter)
        basis[leave] = enter
    raise RuntimeError("simplex iteration limit reached")


def lp_max(A, b, c, tol=1e-11, feas_tol=1e-9, max_iter=10000):
    """Maximise ``c @ x`` subject to ``A @ x == b``, ``x >= 0``.

    Two-phase dense tableau simplex. Returns ``(status, x, objective)``;
    ``x`` and ``objective`` are meaningful only when status is optimal.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    _run(T, basis, n + m, tol, max_iter)
    if -T[m, -1] > feas_tol:
        return LP_INFEASIBLE, np.zeros(n), 0.0

    # drive artificials out of the basis; rows that cannot pivot are redundant
    keep = []
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > tol:
                    _pivot(T, i, j)
                    basis[i] = j
                    break
        if basis[i] < n:
            keep.append(i)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[i] for i in keep]
    mk = len(keep)

    T[mk, :n] = -c
    for i in range(mk):
        T[mk] -= T[mk, basis[i]] * T[i]
    status = _run(T, basis, n, tol, max_iter)
    x = np.zeros(n)
    for i in range(mk):
        x[basis[i]] = T[i, -1]
    if status != LP_OPTIMAL:
        return status, x, np.inf
    return LP_OPTIMAL, x, float(c @ x)
