"""Certified volume brackets for orbit tubes of interval maps.

The orbit tube at horizon n and scale eps is the union over x of the products
of eps-balls around the first n orbit points.  Its n-dimensional Lebesgue
measure is bracketed through the mesh cells of side eps in [0, 1]^n touched
by the orbit curve x -> (x, Tx, ..., T^{n-1}x):

* every touched cell contains a curve point, hence lies inside the tube, so
  count * eps^n  <=  Leb^n(tube);
* the tube is contained in the one-cell dilation of the touched cells, so
  Leb^n(tube)  <=  count * (3 eps)^n.

The bracket gap is exactly n log 3 in the log domain and its propagated
half-width (log 3) / (2 log(1/eps)) vanishes as eps -> 0.

Counting is exact and never enumerates the curve: the count of touched cells
factors over the first coordinate's cell, and the remaining coordinates see
only the set image of the cell piece, a single interval for continuous maps.
The recursion over (interval, horizon) pairs is memoized, so self-similar
block structure collapses to a handful of states.  Cells are half-open with
the top clamp and boundary snap shared with the mesh counts of
:mod:`mdimlab.metric_engine`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._piecewise import Interval, interval_image, interval_image_components
from .metric_engine import CountingError, mesh_cell_count, SNAP

DEFAULT_BUDGET = 10 ** 9
MAX_STATES = 5_000_000

DOMAIN: Interval = (0.0, 1.0, False, False)


class CellBudgetError(CountingError):
    """Touched-cell count exceeds the budget; use larger eps or smaller n."""

    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__(
            f"orbit-tube cell count {count} exceeds budget {budget}; "
            "increase eps or decrease the horizon n"
        )


@dataclass
class TubeBracket:
    """Certified bracket on Leb^n of the orbit tube at one (n, eps).

    ``estimate`` is the fixed-horizon ratio 1 + mid_log / (n log(1/eps));
    the ladder-level estimator in :func:`corollary43_estimate` replaces the
    fixed-horizon mid_log/n by its slope in n.  ``uncertainty`` is the
    propagated bracket half-width (log 3) / (2 log(1/eps)).
    """

    n: int
    epsilon: float
    cell_count: int
    lower_log: float
    upper_log: float
    estimate: float
    uncertainty: float

    @property
    def mid_log(self) -> float:
        return 0.5 * (self.lower_log + self.upper_log)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "cell_count": self.cell_count,
            "lower_log": self.lower_log,
            "upper_log": self.upper_log,
            "mid_log": self.mid_log,
            "estimate_fixed_n": self.estimate,
            "uncertainty": self.uncertainty,
        }


@dataclass
class TubeEstimate:
    """Per-rung record of :func:`corollary43_estimate`.

    ``estimate`` = 1 + slope_n(mid_log) / log(1/eps), the growth-rate
    surrogate for the inner n-limit; the bracket's own fixed-horizon form
    stays available as ``bracket.estimate``.
    """

    bracket: TubeBracket
    estimate: float
    uncertainty: float

    def as_dict(self) -> dict:
        d = self.bracket.as_dict()
        d["estimate"] = self.estimate
        return d


class _TubeCounter:
    """Memoized exact counting of orbit-curve cells for one (map, eps)."""

    def __init__(self, map_, eps: float, budget=DEFAULT_BUDGET, max_states: int = MAX_STATES):
        self.map = map_
        self.eps = float(eps)
        self.m = mesh_cell_count(eps)
        self.budget = budget
        self.max_states = max_states
        self.continuous = getattr(map_, "continuous", True)
        self._count_memo: dict = {}
        self._set_memo: dict = {}

    # -- cell geometry ------------------------------------------------------

    def _snap(self, q: float) -> float:
        r = round(q)
        if abs(q - r) <= SNAP * max(1.0, abs(r)):
            return float(r)
        return q

    def cell_range(self, iv: Interval) -> tuple[int, int]:
        """Inclusive cell index range touched by the interval; (1, 0) if empty."""
        lo, hi, lo_open, hi_open = iv
        if hi < lo or (lo == hi and (lo_open or hi_open)):
            return (1, 0)
        q_lo = self._snap(lo / self.eps)
        i0 = min(max(int(math.floor(q_lo)), 0), self.m - 1)
        q_hi = self._snap(hi / self.eps)
        if hi_open and q_hi == math.floor(q_hi):
            i1 = int(q_hi) - 1
        else:
            i1 = int(math.floor(q_hi))
        i1 = min(max(i1, i0), self.m - 1)
        return (i0, i1)

    def clip_to_cell(self, iv: Interval, c: int) -> Interval:
        lo, hi, lo_open, hi_open = iv
        b0 = c * self.eps
        b1 = (c + 1) * self.eps
        if lo < b0:
            lo, lo_open = b0, False
        if c < self.m - 1 and hi > b1:
            hi, hi_open = b1, True
        if hi < lo:
            # sub-snap sliver straddling the boundary in raw floats; the snap
            # policy assigns it to this cell's boundary point
            return (b0, b0, False, False)
        return (lo, hi, lo_open, hi_open)

    # -- counting -----------------------------------------------------------

    def count(self, iv: Interval, h: int) -> int:
        """Distinct h-tuples of cells visited by orbits starting in iv."""
        if h == 0:
            return 1
        key = (iv[0], iv[1], iv[2], iv[3], h)
        hit = self._count_memo.get(key)
        if hit is not None:
            return hit
        if len(self._count_memo) > self.max_states:
            raise CellBudgetError("state explosion", self.max_states)
        i0, i1 = self.cell_range(iv)
        total = 0
        for c in range(i0, i1 + 1):
            piece = self.clip_to_cell(iv, c)
            if h == 1:
                total += 1
            else:
                img = interval_image(self.map, piece)
                total += self.count(img, h - 1)
        self._count_memo[key] = total
        return total

    def tuples(self, iv: Interval, h: int) -> frozenset:
        """Explicit visited-tuple set (used for dumps and discontinuous maps)."""
        key = (iv[0], iv[1], iv[2], iv[3], h)
        hit = self._set_memo.get(key)
        if hit is not None:
            return hit
        i0, i1 = self.cell_range(iv)
        out = set()
        for c in range(i0, i1 + 1):
            piece = self.clip_to_cell(iv, c)
            if h == 1:
                out.add((c,))
                continue
            comps = interval_image_components(self.map, piece)
            sub: set = set()
            for comp in comps:
                sub |= self.tuples(comp, h - 1)
            out.update((c,) + t for t in sub)
            if self.budget is not None and len(out) > self.budget:
                raise CellBudgetError(len(out), self.budget)
        result = frozenset(out)
        self._set_memo[key] = result
        return result

    def domain_count(self, n: int) -> int:
        if self.continuous:
            total = self.count(DOMAIN, n)
        else:
            total = len(self.tuples(DOMAIN, n))
        if self.budget is not None and total > self.budget:
            raise CellBudgetError(total, self.budget)
        return total


def count_orbit_cells(map_, n: int, eps: float, budget=DEFAULT_BUDGET) -> int:
    """Exact number of eps-mesh cells of [0, 1]^n touched by the orbit curve.

    Requires a map with a breakpoint oracle (``pieces_in``).  Preconditions
    n <= 12 and eps >= 2^-20 keep the mesh addressable; the budget (None to
    disable) rejects runs whose answer itself is astronomically large.
    """
    if n < 1 or n > 12:
        raise CountingError("horizon n must be in 1..12")
    if eps < 2.0 ** -20 or eps > 1.0:
        raise CountingError("eps must lie in [2^-20, 1]")
    if not hasattr(map_, "pieces_in"):
        raise CountingError("map exposes no breakpoint oracle; exact counting unavailable")
    return _TubeCounter(map_, eps, budget).domain_count(n)


def enumerate_orbit_cells(map_, n: int, eps: float, budget=DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """Sorted list of touched cells as index tuples (intended for n <= 4)."""
    if n > 4:
        raise CountingError("cell enumeration is limited to n <= 4")
    counter = _TubeCounter(map_, eps, budget)
    return sorted(counter.tuples(DOMAIN, n))


def tube_bracket(map_, n: int, eps: float, budget=DEFAULT_BUDGET) -> TubeBracket:
    """Certified lower/upper bracket on log Leb^n of the orbit tube."""
    count = count_orbit_cells(map_, n, eps, budget)
    log_c = math.log(count)
    lower = log_c + n * math.log(eps)
    upper = log_c + n * math.log(3.0 * eps)
    log_inv = math.log(1.0 / eps)
    mid = 0.5 * (lower + upper)
    estimate = 1.0 + mid / (n * log_inv)
    return TubeBracket(n=n, epsilon=eps, cell_count=count, lower_log=lower,
                       upper_log=upper, estimate=estimate,
                       uncertainty=math.log(3.0) / (2.0 * log_inv))


def corollary43_estimate(map_, n: int, eps_ladder, budget=DEFAULT_BUDGET) -> list[TubeEstimate]:
    """Dimension-style estimates from tube brackets along an eps ladder.

    For each eps, brackets are computed at horizons 1..n sharing one memo;
    the growth rate of mid_log over the last ceil(n/2) horizons (least
    squares) stands in for the inner n-limit, and the reported estimate is
    1 + slope / log(1/eps) with uncertainty (log 3)/(2 log(1/eps)).
    """
    eps_ladder = [float(e) for e in eps_ladder]
    if not eps_ladder or any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise CountingError("eps ladder must be nonempty and strictly decreasing")
    if n < 2:
        raise CountingError("slope extraction needs n >= 2")
    out = []
    fit_from = n - -(-n // 2)
    for eps in eps_ladder:
        counter = _TubeCounter(map_, eps, budget)
        counts = [counter.domain_count(h) for h in range(1, n + 1)]
        mids = [math.log(c) + h * (math.log(eps) + 0.5 * math.log(3.0))
                for h, c in enumerate(counts, start=1)]
        hs = list(range(1, n + 1))[fit_from:]
        ys = mids[fit_from:]
        hbar = sum(hs) / len(hs)
        ybar = sum(ys) / len(ys)
        denom = sum((hv - hbar) ** 2 for hv in hs)
        slope = sum((hv - hbar) * (yv - ybar) for hv, yv in zip(hs, ys)) / denom
        log_inv = math.log(1.0 / eps)
        log_c = math.log(counts[-1])
        bracket = TubeBracket(
            n=n, epsilon=eps, cell_count=counts[-1],
            lower_log=log_c + n * math.log(eps),
            upper_log=log_c + n * math.log(3.0 * eps),
            estimate=1.0 + mids[-1] / (n * log_inv),
            uncertainty=math.log(3.0) / (2.0 * log_inv),
        )
        out.append(TubeEstimate(bracket=bracket,
                                estimate=1.0 + slope / log_inv,
                                uncertainty=math.log(3.0) / (2.0 * log_inv)))
    return out
