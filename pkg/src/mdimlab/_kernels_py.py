"""Pure-Python/numpy twin of the compiled kernels (fallback backend).

Same contracts as mdimlab._kernels; used when the Cython extension was not
built.  The candidate loop stays in Python but window scans run as chunked
numpy reductions, newest chunk first, so rejected candidates exit early.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_CHUNK = 96


def greedy_bowen_separated(orbits: np.ndarray, eps: float) -> int:
    """Greedy maximal eps-separated subset size of orbit rows (sorted by col 0)."""
    orbits = np.ascontiguousarray(orbits, dtype=float)
    n_rows = orbits.shape[0]
    if n_rows == 0:
        return 0
    eps_eff = eps * (1.0 - 1e-12)
    kept = np.empty(n_rows, dtype=np.intp)
    kept_x0 = np.empty(n_rows)
    n_kept = 0
    w0 = 0
    for i in range(n_rows):
        row = orbits[i]
        x0 = row[0]
        while w0 < n_kept and kept_x0[w0] < x0 - eps_eff:
            w0 += 1
        ok = True
        hi = n_kept
        while hi > w0:
            lo = max(w0, hi - _CHUNK)
            block = orbits[kept[lo:hi]]
            dmax = np.abs(block - row).max(axis=1)
            if (dmax < eps_eff).any():
                ok = False
                break
            hi = lo
        if ok:
            kept[n_kept] = i
            kept_x0[n_kept] = x0
            n_kept += 1
    return int(n_kept)


def greedy_spanning(orbits: np.ndarray, eps: float) -> int:
    """Greedy sweep cover count with eps-Bowen-balls (rows sorted by col 0)."""
    orbits = np.ascontiguousarray(orbits, dtype=float)
    n_rows = orbits.shape[0]
    if n_rows == 0:
        return 0
    eps_eff = eps * (1.0 + 1e-12)
    covered = np.zeros(n_rows, dtype=bool)
    x0s = orbits[:, 0]
    count = 0
    i = 0
    while i < n_rows:
        if covered[i]:
            i += 1
            continue
        count += 1
        covered[i] = True
        r_hi = int(np.searchsorted(x0s, x0s[i] + eps_eff, side="right"))
        if r_hi > i + 1:
            block = orbits[i + 1:r_hi]
            within = np.abs(block - orbits[i]).max(axis=1) <= eps_eff
            covered[i + 1:r_hi] |= within
        i += 1
    return int(count)
