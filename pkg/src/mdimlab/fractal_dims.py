"""Box dimension, Assouad dimension, and Assouad spectrum estimators.

All estimators report the scaling of covering statistics *over the supplied
ladder of scales*; a finite cloud has dimension zero in the limit, so the
ladder itself is the object of study and the docstring of each estimator
names the statistic it extrapolates.

Local covering counts S(B_R(x), r) use coverings by closed balls of radius r:
in one dimension an exact greedy sweep with intervals of length 2r, in higher
dimensions the sup-metric cells of side 2r that the ball touches.  The global
box statistic uses the 0-anchored eps-mesh of :func:`mdimlab.metric_engine.
mesh_cover_count`.  Both choices change counts by bounded factors only, which
cancel in the log-ratio limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .horseshoe import HorseshoeMap, tail_window
from .metric_engine import CountingError, PointCloud, mesh_cover_count

MAX_EXACT_CENTERS = 4096
SUBSAMPLE_STRIDE_TARGET = 2048


@dataclass
class DimensionEstimate:
    value: float
    kind: str  # box_upper | box_lower | assouad | assouad_spectrum
    samples: list[tuple[float, float]] = field(default_factory=list)  # (eps, statistic)
    theta: float | None = None
    doubling_constant: float | None = None

    def __post_init__(self):
        if self.value < 0.0:
            raise CountingError("dimension estimate must be nonnegative")
        eps_list = [e for e, _ in self.samples]
        if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
            raise CountingError("sample epsilons must be strictly decreasing")

    def as_dict(self) -> dict:
        d = {"value": self.value, "kind": self.kind,
             "samples": [[e, s] for e, s in self.samples]}
        if self.theta is not None:
            d["theta"] = self.theta
        if self.doubling_constant is not None:
            d["doubling_constant"] = self.doubling_constant
        return d


def cantor_endpoints(depth: int) -> np.ndarray:
    """Endpoints of the level-`depth` middle-thirds construction (sorted)."""
    pieces = [(0.0, 1.0)]
    for _ in range(depth):
        nxt = []
        for a, b in pieces:
            w = (b - a) / 3.0
            nxt.append((a, a + w))
            nxt.append((b - w, b))
        pieces = nxt
    pts = sorted({p for piece in pieces for p in piece})
    return np.asarray(pts)


def dyadic_grid(n: int) -> np.ndarray:
    """{i/n : 0 <= i <= n}."""
    return np.arange(n + 1, dtype=float) / n


def _centers(cloud: PointCloud) -> np.ndarray:
    """All points when small; deterministic stride plus extremes otherwise."""
    pts = cloud.points
    n = pts.shape[0]
    if n <= MAX_EXACT_CENTERS:
        return pts
    stride = max(n // SUBSAMPLE_STRIDE_TARGET, 1)
    idx = set(range(0, n, stride))
    for d in range(pts.shape[1]):
        idx.add(int(pts[:, d].argmin()))
        idx.add(int(pts[:, d].argmax()))
    return pts[sorted(idx)]


def covering_count_1d(sorted_vals: np.ndarray, width: float) -> int:
    """Minimal covering of a sorted 1-D point set by intervals of given width."""
    n = sorted_vals.size
    if n == 0:
        return 0
    count = 0
    i = 0
    guard = width * 1e-12
    while i < n:
        count += 1
        limit = sorted_vals[i] + width + guard
        i = int(np.searchsorted(sorted_vals, limit, side="right"))
    return count


def local_cover_count(cloud: PointCloud, x: np.ndarray, radius: float, r: float) -> int:
    """S(B_radius(x), d, r): r-ball covering count of the open ball around x.

    1-D uses the exact greedy interval sweep; D >= 2 counts sup-cells of side
    2r (balls centered on the 2r-lattice) touched by the ball's points.
    """
    pts = cloud.points
    if pts.shape[1] == 1:
        v = pts[:, 0]
        sub = v[np.abs(v - x[0]) < radius]
        if sub.size == 0:
            return 0
        return covering_count_1d(np.sort(sub), 2.0 * r)
    mask = np.abs(pts - x).max(axis=1) < radius
    sub = pts[mask]
    if sub.shape[0] == 0:
        return 0
    idx = np.floor(sub / (2.0 * r)).astype(np.int64)
    return int(np.unique(idx, axis=0).shape[0])


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def box_dimension(cloud: PointCloud, eps_ladder) -> tuple[DimensionEstimate, DimensionEstimate]:
    """Upper and lower box estimates: statistic log N(eps) / log(1/eps).

    The upper estimate is the max over the tail window of the ladder
    (last 10%, at least 10 entries, capped at the ladder length), the lower
    the min.  A single-point cloud reports 0.
    """
    eps_ladder = [float(e) for e in eps_ladder]
    if len(eps_ladder) < 4:
        raise CountingError("ladder length must be >= 4")
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise CountingError("ladder must be strictly decreasing")
    samples = []
    for eps in eps_ladder:
        n = mesh_cover_count(cloud, eps)
        samples.append((eps, math.log(n) / math.log(1.0 / eps)))
    w = tail_window(len(samples))
    tail = [s for _, s in samples[-w:]]
    upper = DimensionEstimate(max(tail), "box_upper", samples)
    lower = DimensionEstimate(min(tail), "box_lower", list(samples))
    return upper, lower


def assouad_spectrum(cloud: PointCloud, theta: float, eps_ladder) -> DimensionEstimate:
    """Spectrum estimate at theta: sup over centers of the two-scale statistic.

    For each eps the ball radius is eps^theta and the statistic is
    log sup_x S(B_{eps^theta}(x), d, eps) / ((1 - theta) log(1/eps)); the
    reported value is the tail-window max over the ladder.
    """
    if not 0.0 < theta < 1.0:
        raise CountingError("theta must lie in (0, 1): eps^theta must exceed eps")
    eps_ladder = [float(e) for e in eps_ladder]
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise CountingError("ladder must be strictly decreasing")
    centers = _centers(cloud)
    samples = []
    for eps in eps_ladder:
        radius = eps ** theta
        if radius <= eps:
            raise CountingError(f"eps^theta={radius:g} <= eps={eps:g}")
        best = 0
        for x in centers:
            best = max(best, local_cover_count(cloud, x, radius, eps))
        stat = math.log(max(best, 1)) / ((1.0 - theta) * math.log(1.0 / eps))
        samples.append((eps, stat))
    w = tail_window(len(samples))
    value = max(s for _, s in samples[-w:])
    return DimensionEstimate(value, "assouad_spectrum", samples, theta=theta)


def assouad_dimension(cloud: PointCloud, scale_pairs) -> DimensionEstimate:
    """Assouad estimate: max over (r, R) pairs and centers of
    log S(B_R(x), d, r) / log(R/r); value is the tail-window max over pairs.

    Also reports the observed doubling statistic (worst covering of an R-ball
    by R/2-balls over the same pairs).
    """
    pairs = [(float(r), float(R)) for r, R in scale_pairs]
    for r, R in pairs:
        if not 0.0 < r < R:
            raise CountingError(f"scale pair needs 0 < r < R, got ({r}, {R})")
    centers = _centers(cloud)
    samples = []
    doubling = 0
    for r, R in pairs:
        best = 0
        for x in centers:
            best = max(best, local_cover_count(cloud, x, R, r))
            doubling = max(doubling, local_cover_count(cloud, x, R, R / 2.0))
        stat = math.log(max(best, 1)) / math.log(R / r)
        samples.append((r, stat))
    w = tail_window(len(samples))
    value = max(s for _, s in samples[-w:])
    return DimensionEstimate(value, "assouad", samples, doubling_constant=float(doubling))


def theorem_a_check(map_: HorseshoeMap, alphas, k_max: int = 10_000, slack: float = 0.05):
    """Hoelder-exponent bound check on [0, 1] for a horseshoe map.

    For each alpha, compares the closed-form upper dimension value (lhs)
    against (1 - alpha) * 1, the interval being Ahlfors regular with every
    local dimension equal to 1.  Valid for alphas below the map's Hoelder
    threshold 1 - upper.  Returns (alpha, lhs, rhs, passed) rows with
    ``passed`` meaning lhs <= rhs + slack.
    """
    rows = []
    report = map_.mdim_formula(k_max)
    for alpha in alphas:
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise CountingError("alpha must lie in (0, 1)")
        lhs = report.upper
        rhs = (1.0 - alpha) * 1.0
        rows.append((alpha, lhs, rhs, lhs <= rhs + slack))
    return rows
