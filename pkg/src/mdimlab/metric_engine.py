"""Counting engine: separated/spanning/cover counts under Bowen metrics.

Counts are measured on finite data (point clouds, or orbits of a uniform
delta-grid for maps of [0, 1]); they are lower bounds for the true separated
counts.  Certified upper bounds come from the transition-matrix bounds in
:mod:`mdimlab.transition_spectral`, never from sampling.

Conventions shared across the package:

* mesh cells are half-open [i*eps, (i+1)*eps) anchored at 0, and the maximal
  point of the data belongs to the last cell (no phantom boundary cell);
* separation tests use eps*(1 - 1e-12) to absorb float cancellation;
* the h_eps estimate is the least-squares slope of log count against n over
  the last ceil(n_max/2) horizons, a deterministic stand-in for the n-limit.
  The same slope stands in for both the limsup and liminf variants.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels

SNAP = 1e-9  # relative snap of cell coordinates onto lattice boundaries


class CountingError(ValueError):
    pass


class ResolutionError(CountingError):
    """Grid too coarse for the requested (eps, n_max) measurement.

    ``required_delta`` is the largest grid step that resolves separation at
    the finest requested scale, eps_min / Lambda^(n_max - 1) halved, with
    Lambda the empirical expansion of the map on the grid.
    """

    def __init__(self, delta: float, required_delta: float):
        self.delta = delta
        self.required_delta = required_delta
        super().__init__(
            f"grid step {delta:g} too coarse: separated counts at the requested "
            f"horizon need delta <= {required_delta:g}"
        )


def worker_count() -> int:
    """Worker cap from MDIMLAB_THREADS (0 or unset = auto)."""
    raw = os.environ.get("MDIMLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise CountingError(f"MDIMLAB_THREADS={raw!r} is not an integer") from None
    if n < 0:
        raise CountingError("MDIMLAB_THREADS must be >= 0")
    if n == 0:
        return min(os.cpu_count() or 1, 8)
    return n


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class PointCloud:
    """Finite point set in R^D with a choice of metric."""

    points: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise CountingError("point cloud must be a nonempty (N, D) array")
        if not np.isfinite(pts).all():
            raise CountingError("point cloud coordinates must be finite")
        if self.metric not in ("euclidean", "sup"):
            raise CountingError(f"unknown metric {self.metric!r}")
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def distances_to(self, x: np.ndarray, block: np.ndarray) -> np.ndarray:
        diff = block - x
        if self.metric == "sup" or self.points.shape[1] == 1:
            return np.abs(diff).max(axis=1)
        return np.sqrt((diff * diff).sum(axis=1))


@dataclass
class BowenSystem:
    """A self-map of [0, 1] observed through a uniform delta-grid."""

    map: object  # scalar callable; eval_array/orbit_grid used when available
    n: int
    delta: float

    def __post_init__(self):
        if self.n < 1:
            raise CountingError("time horizon n must be >= 1")
        if not self.delta > 0.0:
            raise CountingError("grid resolution delta must be positive")

    def grid(self) -> np.ndarray:
        m = int(math.floor(1.0 / self.delta + 0.5))
        return np.linspace(0.0, m * self.delta, m + 1).clip(0.0, 1.0)

    def orbit_matrix(self, n: int | None = None) -> np.ndarray:
        n = n or self.n
        xs = self.grid()
        return orbit_matrix(self.map, xs, n)


@dataclass
class LadderRow:
    epsilon: float
    n: int
    count: int
    h_eps: float
    ratio: float


@dataclass
class EntropyLadder:
    rows: list[LadderRow]
    method: str
    n_max: int
    delta: float
    dim: int = 1

    def __post_init__(self):
        eps_seen = []
        for row in self.rows:
            if row.n == self.n_max:
                eps_seen.append(row.epsilon)
            if row.count < 1:
                raise CountingError("counts must be positive")
            if not -1e-12 <= row.ratio <= self.dim + 0.5:
                raise CountingError(f"ratio {row.ratio} outside [0, D + slack]")
        if any(b >= a for a, b in zip(eps_seen, eps_seen[1:])):
            raise CountingError("epsilons must be strictly decreasing across rows")

    def summary_rows(self) -> list[LadderRow]:
        return [r for r in self.rows if r.n == self.n_max]

    def h_for(self, eps: float) -> float:
        for r in self.rows:
            if r.epsilon == eps:
                return r.h_eps
        raise KeyError(eps)


def orbit_matrix(map_, xs: np.ndarray, n: int) -> np.ndarray:
    """Column j = T^j over xs; uses vectorized eval when the map provides it."""
    xs = np.asarray(xs, dtype=float)
    if hasattr(map_, "orbit_grid"):
        return map_.orbit_grid(xs, n)
    out = np.empty((xs.size, n))
    out[:, 0] = xs
    for j in range(1, n):
        prev = out[:, j - 1]
        if hasattr(map_, "eval_array"):
            out[:, j] = map_.eval_array(prev)
        else:
            out[:, j] = np.array([map_(float(v)) for v in prev])
    return out


# ---------------------------------------------------------------------------
# primitive counts
# ---------------------------------------------------------------------------

def bowen_distance(map_, n: int, x: float, y: float) -> float:
    """max over 0 <= j <= n-1 of |T^j x - T^j y|."""
    if n < 1:
        raise CountingError("n must be >= 1")
    d = abs(x - y)
    for _ in range(n - 1):
        x = map_(x)
        y = map_(y)
        d = max(d, abs(x - y))
    return d


def greedy_separated_count(points, eps: float) -> int:
    """Size of the greedily built maximal eps-separated subset.

    ``points`` is a PointCloud (scanned in input order), a 1-D array (scanned
    ascending), or an (N, n) orbit-row family (scanned ascending by first
    coordinate, Bowen sup-distance over rows).  The greedy set is maximal, so
    the count is a lower bound for the optimal separated count and the
    produced set is eps-spanning for the scanned points.
    """
    if eps <= 0.0:
        raise CountingError("eps must be positive")
    if isinstance(points, PointCloud):
        pts = points.points
        if pts.shape[0] == 0:
            raise CountingError("empty input")
        if pts.shape[1] == 1:
            order = np.argsort(pts[:, 0], kind="stable")
            return kernels.greedy_bowen_separated(np.ascontiguousarray(pts[order]), eps)
        eps_eff = eps * (1.0 - 1e-12)
        kept: list[int] = []
        for i in range(pts.shape[0]):
            if not kept:
                kept.append(i)
                continue
            d = points.distances_to(pts[i], pts[kept])
            if (d >= eps_eff).all():
                kept.append(i)
        return len(kept)
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        raise CountingError("empty input")
    if arr.ndim == 1:
        arr = np.sort(arr)[:, None]
    return kernels.greedy_bowen_separated(np.ascontiguousarray(arr), eps)


def cell_index(x: float, eps: float, m: int) -> int:
    """Half-open cell index with boundary snap and top clamp."""
    q = x / eps
    r = round(q)
    if abs(q - r) <= SNAP * max(1.0, abs(r)):
        q = r
    i = int(math.floor(q))
    return min(max(i, 0), m - 1)


def mesh_cell_count(eps: float, span: float = 1.0) -> int:
    q = span / eps
    r = round(q)
    if abs(q - r) <= SNAP * max(1.0, abs(r)):
        q = r
    return max(int(math.ceil(q)), 1)


def mesh_cover_count(points, eps: float) -> int:
    """Occupied cells of the axis-aligned eps-mesh anchored at 0.

    The per-axis maximum of the data is clamped into the last cell it spans,
    so e.g. the point 1.0 never opens a phantom cell beyond [1-eps, 1).
    """
    if eps <= 0.0:
        raise CountingError("eps must be positive")
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise CountingError("empty input")
    q = pts / eps
    r = np.round(q)
    snap = np.abs(q - r) <= SNAP * np.maximum(1.0, np.abs(r))
    q = np.where(snap, r, q)
    idx = np.floor(q).astype(np.int64)
    # per-axis clamp: a maximum sitting exactly on a lattice boundary belongs
    # to the cell below it, not to a phantom cell of its own
    for d in range(idx.shape[1]):
        qm = float(pts[:, d].max() / eps)
        rm = round(qm)
        if abs(qm - rm) <= SNAP * max(1.0, abs(rm)):
            qm = float(rm)
        if qm == math.floor(qm) and qm > 0:
            col = idx[:, d]
            col[col >= int(qm)] = int(qm) - 1
    return int(np.unique(idx, axis=0).shape[0])


def _orbit_cover_count(orbits: np.ndarray, eps: float) -> int:
    """Occupied eps-cells in orbit space for the sampled orbit rows."""
    q = orbits / eps
    r = np.round(q)
    snap = np.abs(q - r) <= SNAP * np.maximum(1.0, np.abs(r))
    q = np.where(snap, r, q)
    idx = np.floor(q).astype(np.int64)
    m = mesh_cell_count(eps)
    np.clip(idx, 0, m - 1, out=idx)
    return int(np.unique(idx, axis=0).shape[0])


def _count_at(orbits_n: np.ndarray, eps: float, method: str) -> int:
    if method == "separated":
        return kernels.greedy_bowen_separated(orbits_n, eps)
    if method == "spanning":
        return kernels.greedy_spanning(orbits_n, eps)
    if method == "cover":
        return _orbit_cover_count(orbits_n, eps)
    raise CountingError(f"unknown method {method!r}")


def slope_fit(ns: np.ndarray, logs: np.ndarray) -> float:
    """Least-squares slope of logs against ns."""
    ns = np.asarray(ns, dtype=float)
    logs = np.asarray(logs, dtype=float)
    nbar = ns.mean()
    denom = ((ns - nbar) ** 2).sum()
    if denom == 0.0:
        return 0.0
    return float(((ns - nbar) * (logs - logs.mean())).sum() / denom)


# Divisor of the finest separation scale demanded of the grid step.  It is
# deliberately non-integer: the realizable spacing on a delta-grid is
# ceil(scale/delta)*delta, and an integer divisor would park that spacing
# exactly on the separation scale, where float rounding rejects half the
# pairs.  2.9 puts the spacing ~3.4% above the scale at every horizon.
RESOLUTION_FACTOR = 2.9


def required_delta(map_, eps_min: float, n_max: int, delta_probe: float = 1e-4) -> float:
    """Largest grid step resolving separation at (eps_min, n_max).

    The empirical expansion Lambda is the max one-step difference quotient of
    the map over a probe grid; the finest separation scale is then
    eps_min / Lambda^(n_max - 1), of which the grid step must be a comfortable
    fraction (see RESOLUTION_FACTOR).
    """
    xs = np.arange(0.0, 1.0 + delta_probe / 2, delta_probe)
    ys = orbit_matrix(map_, xs, 2)[:, 1]
    lam = float(np.abs(np.diff(ys)).max() / delta_probe)
    lam = max(lam, 1.0)
    return eps_min / (RESOLUTION_FACTOR * lam ** (n_max - 1))


def entropy_ladder(map_, eps_ladder, n_max: int, delta: float,
                   method: str = "separated", enforce_resolution: bool = True) -> EntropyLadder:
    """Counts over the orbit grid for each (eps, n) and the h_eps slopes.

    For each eps in the strictly decreasing ladder, counts the orbit rows of
    the uniform delta-grid at horizons n = 1..n_max, then extracts
    h_eps as the least-squares slope of log count over the last ceil(n_max/2)
    horizons and records ratio = h_eps / log(1/eps).

    Refuses with :class:`ResolutionError` (carrying the required delta) when
    the grid cannot resolve the separation scale of the finest rung at the
    full horizon; pass ``enforce_resolution=False`` to force the measurement,
    which then only certifies a lower envelope.
    """
    eps_ladder = [float(e) for e in eps_ladder]
    if not eps_ladder or any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise CountingError("eps ladder must be nonempty and strictly decreasing")
    if n_max < 4:
        raise CountingError("n_max must be >= 4")
    if delta > min(eps_ladder) / 10.0:
        raise ResolutionError(delta, min(eps_ladder) / 10.0)
    sys0 = BowenSystem(map_, n_max, delta)
    orbits = sys0.orbit_matrix()
    if method == "separated" and enforce_resolution:
        lam = float(np.abs(np.diff(orbits[:, 1])).max() / delta) if n_max > 1 else 1.0
        lam = max(lam, 1.0)
        req = min(eps_ladder) / (RESOLUTION_FACTOR * lam ** (n_max - 1))
        if delta > req * (1.0 + 1e-9):
            raise ResolutionError(delta, req)

    ns = np.arange(1, n_max + 1)
    fit_from = n_max - -(-n_max // 2)  # last ceil(n_max/2) horizons

    def counts_for(eps: float) -> list[int]:
        return [_count_at(np.ascontiguousarray(orbits[:, :n]), eps, method) for n in ns]

    workers = min(worker_count(), len(eps_ladder))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_counts = list(pool.map(counts_for, eps_ladder))
    else:
        all_counts = [counts_for(e) for e in eps_ladder]

    rows: list[LadderRow] = []
    for eps, counts in zip(eps_ladder, all_counts):
        logs = np.log(counts)
        h = slope_fit(ns[fit_from:], logs[fit_from:])
        h = max(h, 0.0)
        ratio = h / math.log(1.0 / eps) if eps < 1.0 else 0.0
        for n, c in zip(ns, counts):
            rows.append(LadderRow(eps, int(n), int(c), h, ratio))
    return EntropyLadder(rows=rows, method=method, n_max=n_max, delta=delta)


def write_entropy_csv(ladder: EntropyLadder, path) -> None:
    """Frozen schema: epsilon,n,count,h_eps,ratio — one row per ladder rung."""
    lines = ["epsilon,n,count,h_eps,ratio"]
    for r in ladder.summary_rows():
        lines.append(f"{r.epsilon!r},{r.n},{r.count},{r.h_eps!r},{r.ratio!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
