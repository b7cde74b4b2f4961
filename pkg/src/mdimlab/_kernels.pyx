# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: greedy separated-set counting under Bowen metrics.

Semantics must match mdimlab._kernels_py exactly; the Python module is the
fallback selected at import time when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


def greedy_bowen_separated(double[:, ::1] orbits, double eps):
    """Greedy maximal eps-separated subset size of orbit rows.

    Rows must be sorted ascending by column 0.  Separation of two rows means
    max_j |row1[j] - row2[j]| >= eps*(1 - 1e-12); since the max dominates the
    first coordinate, only previously kept rows within eps of the candidate's
    first coordinate need checking.  Kept rows are scanned newest-first and
    coordinates highest-first, which exits early on typical expanding-map
    data.
    """
    cdef Py_ssize_t n_rows = orbits.shape[0]
    cdef Py_ssize_t n_cols = orbits.shape[1]
    cdef double eps_eff = eps * (1.0 - 1e-12)
    if n_rows == 0:
        return 0
    kept_arr = np.empty(n_rows, dtype=np.intp)
    cdef Py_ssize_t[::1] kept = kept_arr
    cdef Py_ssize_t n_kept = 0, w0 = 0
    cdef Py_ssize_t i, t, k, j
    cdef double x0, d
    cdef bint pair_sep, cand_ok

    for i in range(n_rows):
        x0 = orbits[i, 0]
        while w0 < n_kept and orbits[kept[w0], 0] < x0 - eps_eff:
            w0 += 1
        cand_ok = True
        t = n_kept - 1
        while t >= w0:
            k = kept[t]
            pair_sep = False
            j = n_cols - 1
            while j >= 0:
                d = orbits[i, j] - orbits[k, j]
                if d < 0:
                    d = -d
                if d >= eps_eff:
                    pair_sep = True
                    break
                j -= 1
            if not pair_sep:
                cand_ok = False
                break
            t -= 1
        if cand_ok:
            kept[n_kept] = i
            n_kept += 1
    return int(n_kept)


def greedy_spanning(double[:, ::1] orbits, double eps):
    """Greedy sweep cover: size of a covering set of eps-Bowen-balls.

    Rows sorted ascending by column 0.  Scanning left to right, each uncovered
    row becomes a center and covers every row within Bowen distance <= eps
    (with the same 1e-12 relative guard, applied permissively for covering).
    """
    cdef Py_ssize_t n_rows = orbits.shape[0]
    cdef Py_ssize_t n_cols = orbits.shape[1]
    cdef double eps_eff = eps * (1.0 + 1e-12)
    if n_rows == 0:
        return 0
    covered_arr = np.zeros(n_rows, dtype=np.uint8)
    cdef unsigned char[::1] covered = covered_arr
    cdef Py_ssize_t i, r, j
    cdef Py_ssize_t count = 0
    cdef double x0, d
    cdef bint within

    for i in range(n_rows):
        if covered[i]:
            continue
        count += 1
        covered[i] = 1
        x0 = orbits[i, 0]
        r = i + 1
        while r < n_rows and orbits[r, 0] - x0 <= eps_eff:
            if not covered[r]:
                within = True
                j = n_cols - 1
                while j >= 0:
                    d = orbits[i, j] - orbits[r, j]
                    if d < 0:
                        d = -d
                    if d > eps_eff:
                        within = False
                        break
                    j -= 1
                if within:
                    covered[r] = 1
            r += 1
    return int(count)
