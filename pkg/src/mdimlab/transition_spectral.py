"""Transition matrices over eps-covers and certified spectral-radius bounds.

The 0-1 matrix has entry (i, j) exactly when the image of cover element U_i
meets U_j (open-overlap; touching at a point does not count, so measure-zero
contacts never create transitions).  The log of its spectral radius bounds
the eps-entropy of the map from above, and everything here bounds or
estimates that spectral radius:

* ``gershgorin_row`` / ``gershgorin_col``: log max row/column sum — the
  circle-theorem bounds for a 0-1 matrix and its transpose;
* ``knorm(k)``: (1/k) log of the max-row-sum norm of the k-th power,
  computed by sparse vector iteration with rescaling (never overflows).
  The max-row-sum norm is submultiplicative and induced, so every k gives a
  certified upper bound on log r; the sum over all entries carries an extra
  log(M)/k offset and is reported alongside for reference;
* ``power_iteration``: L1-normalized dominant-eigenvalue estimate
  (relative tolerance 1e-10, at most 10^4 iterations).

Two cover conventions are provided.  ``build_cover`` places centers on the
arithmetic grid {0, eps, 2*eps, ...} with radius eps (a maximal eps-separated
family whose eps-balls cover [0, 1]).  ``build_mesh_cover`` uses the open
eps-mesh cells — centers at cell midpoints with radius eps/2 — which tracks
the map's expansion without the overlap inflation of the ball cover and is
the default for the bound pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._piecewise import interval_image_components
from .metric_engine import CountingError, cell_index, mesh_cell_count


class MatrixBuildError(ValueError):
    pass


@dataclass(frozen=True)
class EpsCover:
    centers: np.ndarray
    radius: float
    kind: str  # "ball" | "mesh"

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise MatrixBuildError("cover needs a nonempty 1-D center list")
        if np.any(np.diff(c) <= 0):
            raise MatrixBuildError("centers must be strictly increasing")
        object.__setattr__(self, "centers", c)

    @property
    def size(self) -> int:
        return int(self.centers.size)

    def element(self, i: int) -> tuple[float, float]:
        """Open interval (lo, hi) of cover element i (0-based)."""
        c = self.centers[i]
        return (c - self.radius, c + self.radius)


def build_cover(eps: float) -> EpsCover:
    """Ball cover: centers {0, eps, 2*eps, ...} clipped to [0, 1], radius eps.

    Degenerate case eps >= 1 gives the single center 0.5.
    """
    if eps <= 0.0:
        raise MatrixBuildError("eps must be positive")
    if eps >= 1.0:
        return EpsCover(np.array([0.5]), float(eps), "ball")
    n = int(math.floor(1.0 / eps + 1e-9))
    centers = np.arange(n + 1, dtype=float) * eps
    if centers[-1] > 1.0:
        centers[-1] = 1.0
    return EpsCover(centers, float(eps), "ball")


def build_mesh_cover(eps: float) -> EpsCover:
    """Open eps-mesh cells as cover elements (midpoint centers, radius eps/2)."""
    if eps <= 0.0:
        raise MatrixBuildError("eps must be positive")
    m = mesh_cell_count(eps)
    centers = (np.arange(m, dtype=float) + 0.5) * eps
    return EpsCover(centers, float(eps) / 2.0, "mesh")


@dataclass
class TransitionMatrix:
    """Sparse row-major 0-1 matrix over a cover."""

    size: int
    indptr: np.ndarray
    indices: np.ndarray
    exact: bool

    @classmethod
    def from_rows(cls, rows: list[np.ndarray], exact: bool) -> "TransitionMatrix":
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        for i, r in enumerate(rows):
            indptr[i + 1] = indptr[i] + len(r)
        indices = np.concatenate([np.asarray(r, dtype=np.int64) for r in rows]) if rows else np.array([], dtype=np.int64)
        return cls(size=len(rows), indptr=indptr, indices=indices, exact=exact)

    def row(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def rows(self) -> list[np.ndarray]:
        return [self.row(i) for i in range(self.size)]

    def row_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def col_counts(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.size)

    def transpose(self) -> "TransitionMatrix":
        rows: list[list[int]] = [[] for _ in range(self.size)]
        for i in range(self.size):
            for j in self.row(i):
                rows[int(j)].append(i)
        return TransitionMatrix.from_rows([np.array(sorted(r), dtype=np.int64) for r in rows], self.exact)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.size)
        for i in range(self.size):
            out[i] = v[self.indices[self.indptr[i]:self.indptr[i + 1]]].sum()
        return out

    def dense(self) -> np.ndarray:
        a = np.zeros((self.size, self.size))
        for i in range(self.size):
            a[i, self.row(i)] = 1.0
        return a

    def write_coo(self, path) -> None:
        """Coordinate list, one `i j` pair per line, 1-based, sorted."""
        lines = []
        for i in range(self.size):
            for j in self.row(i):
                lines.append(f"{i + 1} {int(j) + 1}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


# Touching at a point never counts as overlap; branch-image endpoints carry
# ~1 ulp of affine-arithmetic noise, so "touching" means within this margin.
TOUCH_GUARD = 1e-12


def _overlap_columns(component, cover: EpsCover) -> list[int]:
    """Indices j with open element (c_j - r, c_j + r) meeting the component."""
    lo, hi, lo_open, hi_open = component
    if lo == hi and (lo_open or hi_open):
        return []
    r = cover.radius
    c = cover.centers
    # first j whose element's right end could exceed lo
    i0 = int(np.searchsorted(c, lo - r - TOUCH_GUARD, side="left"))
    out = []
    for j in range(max(i0 - 1, 0), cover.size):
        a, b = cover.element(j)
        if a >= hi - TOUCH_GUARD:
            break
        if lo == hi:
            if a + TOUCH_GUARD < lo < b - TOUCH_GUARD:
                out.append(j)
        elif lo < b - TOUCH_GUARD:
            out.append(j)
    return out


def build_matrix_exact(map_, cover: EpsCover) -> TransitionMatrix:
    """Exact transition matrix for a piecewise-monotone map with a breakpoint oracle.

    For each open cover element the image is computed as a finite interval
    union by splitting at branch breakpoints; entries mark open overlap with
    the target elements.  A row left empty by boundary-degenerate images (the
    image is a single lattice point) falls back to that point's mesh cell so
    the matrix still reflects a total map.
    """
    if not hasattr(map_, "pieces_in"):
        raise MatrixBuildError(
            "map exposes no breakpoint oracle; use build_matrix_sampled instead"
        )
    rows = []
    m = cover.size
    for i in range(m):
        lo, hi = cover.element(i)
        lo_c, hi_c = max(lo, 0.0), min(hi, 1.0)
        comps = interval_image_components(map_, (lo_c, hi_c, True, True))
        cols: set[int] = set()
        for comp in comps:
            cols.update(_overlap_columns(comp, cover))
        if not cols:
            v = comps[0][0]
            cols.add(cell_index(v, 2 * cover.radius, m) if cover.kind == "mesh"
                     else int(np.argmin(np.abs(cover.centers - v))))
        rows.append(np.array(sorted(cols), dtype=np.int64))
    return TransitionMatrix.from_rows(rows, exact=True)


def build_matrix_sampled(map_, cover: EpsCover, samples_per_cell: int = 16) -> TransitionMatrix:
    """Sampled under-approximation: entries witnessed by sample orbits only.

    Deterministic equispaced samples strictly inside each element; every
    entry set here is an entry of the exact matrix on the same inputs, and
    bounds derived from the result are flagged certified=False.
    """
    if samples_per_cell < 8:
        raise MatrixBuildError("samples_per_cell must be >= 8")
    rows = []
    m = cover.size
    for i in range(m):
        lo, hi = cover.element(i)
        lo_c, hi_c = max(lo, 0.0), min(hi, 1.0)
        step = (hi_c - lo_c) / (samples_per_cell + 1)
        cols: set[int] = set()
        for s in range(1, samples_per_cell + 1):
            x = lo_c + s * step
            y = map_(x)
            j0 = int(np.searchsorted(cover.centers, y - cover.radius, side="left"))
            for j in range(max(j0 - 1, 0), m):
                a, b = cover.element(j)
                if a >= y:
                    break
                if a < y < b:
                    cols.add(j)
        if not cols:
            y = map_((lo_c + hi_c) / 2.0)
            cols.add(cell_index(y, 2 * cover.radius, m) if cover.kind == "mesh"
                     else int(np.argmin(np.abs(cover.centers - y))))
        rows.append(np.array(sorted(cols), dtype=np.int64))
    return TransitionMatrix.from_rows(rows, exact=False)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

@dataclass
class SpectralBound:
    method: str
    value: float  # bound or estimate on log r
    certified: bool
    k: int | None = None
    converged: bool | None = None
    iterations: int | None = None
    sum_norm_value: float | None = None  # (1/k) log of the all-entries sum, for reference

    def as_dict(self) -> dict:
        d = {"method": self.method, "value": self.value, "certified": self.certified}
        if self.k is not None:
            d["k"] = self.k
        if self.converged is not None:
            d["converged"] = self.converged
        if self.sum_norm_value is not None:
            d["sum_norm_value"] = self.sum_norm_value
        return d


def bound(matrix: TransitionMatrix, method: str, k: int = 12,
          tol: float = 1e-10, max_iter: int = 10_000) -> SpectralBound:
    """Certified bounds / estimates on log r for a nonnegative 0-1 matrix.

    ``knorm`` iterates v <- Gamma v from the all-ones vector with per-step
    rescaling, so k log(max row sum) beyond float range never overflows.
    """
    if matrix.size == 0:
        raise MatrixBuildError("empty matrix")
    if method == "gershgorin_row":
        return SpectralBound(method, math.log(int(matrix.row_counts().max())), matrix.exact)
    if method == "gershgorin_col":
        return SpectralBound(method, math.log(int(matrix.col_counts().max())), matrix.exact)
    if method == "knorm":
        if k < 1:
            raise MatrixBuildError("knorm needs k >= 1")
        v = np.ones(matrix.size)
        log_scale = 0.0
        for _ in range(k):
            v = matrix.matvec(v)
            s = float(v.max())
            if s <= 0.0:
                return SpectralBound(method, -math.inf, matrix.exact, k=k)
            log_scale += math.log(s)
            v = v / s
        # Gamma^k 1 = exp(log_scale) * v with max(v) = 1
        return SpectralBound(method, log_scale / k, matrix.exact, k=k,
                             sum_norm_value=(log_scale + math.log(float(v.sum()))) / k)
    if method == "power_iteration":
        v = np.ones(matrix.size) / matrix.size
        lam_prev = None
        converged = False
        iterations = 0
        lam = 0.0
        for iterations in range(1, max_iter + 1):
            w = matrix.matvec(v)
            lam = float(w.sum())  # L1 norm: entries nonnegative
            if lam <= 0.0:
                return SpectralBound(method, -math.inf, False, converged=False, iterations=iterations)
            v = w / lam
            if lam_prev is not None and abs(lam - lam_prev) <= tol * lam:
                converged = True
                break
            lam_prev = lam
        certified = matrix.exact and converged
        return SpectralBound(method, math.log(lam), certified,
                             converged=converged, iterations=iterations)
    raise MatrixBuildError(f"unknown bound method {method!r}")
