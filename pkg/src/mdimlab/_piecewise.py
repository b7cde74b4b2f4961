"""Internal piecewise-monotone map plumbing shared by the tube and matrix builders.

A map usable by the exact engines exposes, besides pointwise evaluation, a
*breakpoint oracle*: an iterator of monotone affine pieces covering any query
interval.  Pieces are closed intervals [x0, x1] with the values (y0, y1) at
their ends; monotonicity means every extremum of the map over the query
interval is attained at a piece end.

Intervals throughout carry end-openness flags ``(lo, hi, lo_open, hi_open)``
so that set images can be computed with exact attainment bookkeeping: an
extremum reached only at an excluded query endpoint yields an open image end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Protocol, runtime_checkable

Interval = tuple[float, float, bool, bool]  # lo, hi, lo_open, hi_open


@dataclass(frozen=True)
class AffinePiece:
    x0: float
    x1: float
    y0: float
    y1: float

    def value_at(self, x: float) -> float:
        if self.x1 == self.x0:
            return self.y0
        t = (x - self.x0) / (self.x1 - self.x0)
        return self.y0 + t * (self.y1 - self.y0)


@runtime_checkable
class BranchOracle(Protocol):
    continuous: bool

    def __call__(self, x: float) -> float: ...

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]: ...


class IdentityMap:
    """T(x) = x on [0, 1]."""

    continuous = True

    def __call__(self, x: float) -> float:
        return x

    def eval_array(self, xs):
        return xs

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]:
        yield AffinePiece(lo, hi, lo, hi)


class ConstantMap:
    """T(x) = c on [0, 1]."""

    continuous = True

    def __init__(self, c: float = 0.0):
        self.c = float(c)

    def __call__(self, x: float) -> float:
        return self.c

    def eval_array(self, xs):
        import numpy as np

        return np.full_like(np.asarray(xs, dtype=float), self.c)

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]:
        yield AffinePiece(lo, hi, self.c, self.c)


class PiecewiseAffineMap:
    """Generic continuous piecewise-affine map given by node lists.

    ``xs`` must be strictly increasing and span the domain; ``ys`` are the
    values at the nodes.  Linear interpolation in between.
    """

    continuous = True

    def __init__(self, xs, ys):
        self.xs = [float(v) for v in xs]
        self.ys = [float(v) for v in ys]
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("need matching node lists of length >= 2")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("node abscissae must be strictly increasing")

    def __call__(self, x: float) -> float:
        import bisect

        i = bisect.bisect_right(self.xs, x) - 1
        i = min(max(i, 0), len(self.xs) - 2)
        p = AffinePiece(self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1])
        return p.value_at(x)

    def eval_array(self, xs):
        import numpy as np

        return np.interp(np.asarray(xs, dtype=float), self.xs, self.ys)

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]:
        import bisect

        i = max(bisect.bisect_right(self.xs, lo) - 1, 0)
        while i < len(self.xs) - 1 and self.xs[i] < hi:
            a, b = self.xs[i], self.xs[i + 1]
            ya, yb = self.ys[i], self.ys[i + 1]
            p0, p1 = max(a, lo), min(b, hi)
            if p1 > p0 or (p1 == p0 and (p0 == lo or p0 == hi)):
                piece = AffinePiece(a, b, ya, yb)
                yield AffinePiece(p0, p1, piece.value_at(p0), piece.value_at(p1))
            i += 1


class StepMap:
    """Discontinuous test map: T(x) = lo_map(x) for x < split else hi_map(x).

    Pieces on either side come from affine segments; the jump at ``split``
    makes interval images genuinely disconnected, exercising the set-based
    counting path.
    """

    continuous = False

    def __init__(self, split: float, left: AffinePiece, right: AffinePiece):
        self.split = float(split)
        self.left = left
        self.right = right

    def __call__(self, x: float) -> float:
        return self.left.value_at(x) if x < self.split else self.right.value_at(x)

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]:
        if lo < self.split:
            p1 = min(hi, self.split)
            yield AffinePiece(lo, p1, self.left.value_at(lo), self.left.value_at(p1))
        if hi >= self.split:
            p0 = max(lo, self.split)
            yield AffinePiece(p0, hi, self.right.value_at(p0), self.right.value_at(hi))


def _end_values(map_, iv: Interval) -> list[tuple[float, bool]]:
    """(value, attained) at every piece end over the interval."""
    lo, hi, lo_open, hi_open = iv
    out = []
    for piece in map_.pieces_in(lo, hi):
        for x, y in ((piece.x0, piece.y0), (piece.x1, piece.y1)):
            excluded = (x == lo and lo_open) or (x == hi and hi_open)
            out.append((y, not excluded))
    if not out:
        raise ValueError("breakpoint oracle yielded no pieces")
    return out


def interval_image(map_, iv: Interval) -> Interval:
    """Exact image of one interval under a continuous piecewise-monotone map.

    Openness of the image ends reflects attainment: an extremum realized only
    at an excluded end of ``iv`` gives an open image end.
    """
    lo, hi, lo_open, hi_open = iv
    if hi < lo:
        raise ValueError("empty interval")
    if lo == hi:
        v = map_(lo)
        o = lo_open or hi_open
        return (v, v, o, o)
    vals = _end_values(map_, iv)
    vmin = min(v for v, _ in vals)
    vmax = max(v for v, _ in vals)
    min_attained = any(att for v, att in vals if v == vmin)
    max_attained = any(att for v, att in vals if v == vmax)
    return (vmin, vmax, not min_attained, not max_attained)


def interval_image_components(map_, iv: Interval) -> list[Interval]:
    """Image as a list of disjoint intervals (for discontinuous maps).

    Per-piece affine images are merged wherever they overlap or touch with at
    least one closed end.
    """
    lo, hi, lo_open, hi_open = iv
    if lo == hi:
        v = map_(lo)
        o = lo_open or hi_open
        return [(v, v, o, o)]
    parts: list[Interval] = []
    for piece in map_.pieces_in(lo, hi):
        ends = []
        for x, y in ((piece.x0, piece.y0), (piece.x1, piece.y1)):
            excluded = (x == lo and lo_open) or (x == hi and hi_open)
            ends.append((y, excluded))
        ends.sort(key=lambda t: (t[0], t[1]))
        parts.append((ends[0][0], ends[1][0], ends[0][1], ends[1][1]))
    parts.sort(key=lambda p: (p[0], p[1]))
    merged: list[Interval] = []
    for p in parts:
        if merged:
            q = merged[-1]
            touches = p[0] < q[1] or (p[0] == q[1] and not (p[2] and q[3]))
            if touches:
                if p[1] > q[1] or (p[1] == q[1] and not p[3]):
                    merged[-1] = (q[0], p[1], q[2], p[3])
                continue
        merged.append(p)
    return merged
