# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pair-distance projection and tableau pivoting.

Mirrors ``_kernels_py`` expression for expression.  The build disables
fused multiply-adds (-ffp-contract=off) so results stay bit-identical to
the pure-Python engine; keep both files in sync when editing either.
"""

from libc.math cimport sqrt


def project_pairs(double[:, ::1] pts, Py_ssize_t[::1] ii, Py_ssize_t[::1] jj,
                  double[::1] targets, double tol, Py_ssize_t max_sweeps):
    """Gauss-Seidel projection of vertex pairs onto distance targets, in place.

    Same contract as ``_kernels_py.project_pairs``: returns (sweeps_used,
    max_residual) with the residual measured after the final sweep.
    """
    cdef Py_ssize_t m = ii.shape[0]
    cdef Py_ssize_t k, a, b
    cdef Py_ssize_t sweep = 0
    cdef double dx, dy, d, err, corr, cx, cy, worst

    while sweep < max_sweeps:
        sweep += 1
        worst = 0.0
        for k in range(m):
            a = ii[k]
            b = jj[k]
            dx = pts[b, 0] - pts[a, 0]
            dy = pts[b, 1] - pts[a, 1]
            d = sqrt(dx * dx + dy * dy)
            if d == 0.0:
                continue
            err = d - targets[k]
            if err > worst:
                worst = err
            elif -err > worst:
                worst = -err
            corr = 0.5 * err / d
            cx = corr * dx
            cy = corr * dy
            pts[a, 0] += cx
            pts[a, 1] += cy
            pts[b, 0] -= cx
            pts[b, 1] -= cy
        if worst <= tol:
            break
    worst = 0.0
    for k in range(m):
        a = ii[k]
        b = jj[k]
        dx = pts[b, 0] - pts[a, 0]
        dy = pts[b, 1] - pts[a, 1]
        err = sqrt(dx * dx + dy * dy) - targets[k]
        if err > worst:
            worst = err
        elif -err > worst:
            worst = -err
    return sweep, worst


def pivot_update(double[:, ::1] T, Py_ssize_t row, Py_ssize_t col):
    """Pivot a dense tableau on (row, col), in place.

    Same contract as ``_kernels_py.pivot_update``.
    """
    cdef Py_ssize_t nrows = T.shape[0]
    cdef Py_ssize_t ncols = T.shape[1]
    cdef Py_ssize_t r, k
    cdef double piv = T[row, col]
    cdef double f

    for k in range(ncols):
        T[row, k] = T[row, k] / piv
    for r in range(nrows):
        if r == row:
            continue
        f = T[r, col]
        if f == 0.0:
            continue
        for k in range(ncols):
            T[r, k] = T[r, k] - f * T[row, k]
    for r in range(nrows):
        T[r, col] = 0.0
    T[row, col] = 1.0
