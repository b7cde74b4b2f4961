"""The two-parameter horseshoe family of interval maps and its closed forms.

The map is assembled from countably many full-branch piecewise-affine blocks:
block k acts on J_k = [a_{k-1}, a_k] through b_k equidistributed branches of
slope +-b_k, rising in the first branch (and, b_k being odd, in the last), so
consecutive branches alternate orientation and the map is continuous with
T(0) = 0 and T(1) = 1.  Each block maps onto itself, so the dynamics splits
into an infinite sequence of horseshoes accumulating at 1.

Point location uses the right-open convention J_k = [a_{k-1}, a_k): a point
equal to a_k belongs to block k+1.  Both block formulas agree there, so the
choice only pins down branch indexing.

Precision: everything is double precision.  Blocks with |J_k| < 1e-9 lose up
to ~1e-6 relative accuracy in branch-local coordinates; blocks below 1e-15
are treated as fixed points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ._piecewise import AffinePiece
from .params import ParameterSpec, ParameterError, TAIL_FLOOR

TAIL_ATOL = 1e-12  # width below which remaining blocks are emitted as an identity tail


class DomainError(ValueError):
    """Argument outside [0, 1] or an invalid branch word."""


@dataclass(frozen=True)
class Cylinder:
    """Branch cylinder J_s(i_1, ..., i_n) inside block s.

    ``lo``/``hi`` are the exact endpoints from recursive affine pullback;
    length is |J_s| / b_s^n and cylinders nest along word prefixes.
    """

    s: int
    word: tuple[int, ...]
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass
class MdimReport:
    """Closed-form dimension report for one parameter spec.

    ``ratio_k[k-1] = log b_k / log(1/eps_k)``; ``upper``/``lower`` are the
    max/min over the tail window (last 10% of indices, at least 10), the
    deterministic stand-in for the k -> infinity limsup/liminf.  The largest
    Hoelder exponent the map admits is ``holder_sup = 1 - upper`` exactly.
    """

    upper: float
    lower: float
    holder_sup: float
    k_max: int
    ratio_k: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "upper": self.upper,
            "lower": self.lower,
            "holder_sup": self.holder_sup,
            "k_max": self.k_max,
        }


def tail_window(n: int, minimum: int = 10) -> int:
    """Length of the tail window over n indices: last 10%, at least `minimum`."""
    return min(n, max(minimum, -(-n // 10)))


class HorseshoeMap:
    """Evaluable realization of one member of the family."""

    continuous = True

    def __init__(self, spec: ParameterSpec):
        report = spec.validate()
        if not report.ok:
            raise ParameterError(f"invalid parameter spec: {[v.as_tuple() for v in report.violations]}")
        self.spec = spec

    # -- evaluation -----------------------------------------------------------

    def __call__(self, x: float) -> float:
        return self.eval(x)

    def eval(self, x: float) -> float:
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"x={x!r} outside [0, 1]")
        if x == 1.0:
            return 1.0
        k = self.spec.locate(x)
        if k == 0:
            return x  # sub-resolution tail: fixed to within 1e-15
        a = self.spec.a(k - 1)
        gap = self.spec.gap(k)
        b = self.spec.branches(k)
        t = (x - a) / gap
        i = min(int(b * t), b - 1)
        u = b * t - i
        f = u if i % 2 == 0 else (1.0 - u)
        y = a + gap * f
        return min(max(y, a), a + gap)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized eval; same conventions as :meth:`eval`."""
        xs = np.asarray(xs, dtype=float)
        if xs.size and (xs.min() < 0.0 or xs.max() > 1.0):
            raise DomainError("array eval expects values in [0, 1]")
        out = np.array(xs, dtype=float, copy=True)
        interior = xs < 1.0
        if not interior.any():
            return out
        xmax = xs[interior].max()
        prefix = self.spec.prefix_array(xmax)
        x = xs[interior]
        k = np.searchsorted(prefix, x, side="right")  # block index, 1-based
        resolved = k < len(prefix)
        k_res = k[resolved]
        a = prefix[k_res - 1]
        gap = prefix[k_res] - a
        uniq, inv = np.unique(k_res, return_inverse=True)
        b = np.array([self.spec.branches(int(kk)) for kk in uniq], dtype=float)[inv]
        t = (x[resolved] - a) / gap
        i = np.minimum(np.floor(b * t), b - 1.0)
        u = b * t - i
        f = np.where(i % 2.0 == 0.0, u, 1.0 - u)
        y = np.clip(a + gap * f, a, a + gap)
        vals = np.array(x, copy=True)  # unresolved tail points stay fixed
        vals[resolved] = y
        out[interior] = vals
        return out

    def orbit(self, x: float, n: int) -> list[float]:
        """[x, T(x), ..., T^{n-1}(x)]."""
        if n < 1:
            raise DomainError("orbit length must be positive")
        out = [float(x)]
        for _ in range(n - 1):
            out.append(self.eval(out[-1]))
        return out

    def orbit_grid(self, xs: np.ndarray, n: int) -> np.ndarray:
        """Column j holds T^j over the input grid; shape (len(xs), n)."""
        xs = np.asarray(xs, dtype=float)
        out = np.empty((xs.size, n))
        out[:, 0] = xs
        for j in range(1, n):
            out[:, j] = self.eval_array(out[:, j - 1])
        return out

    # -- breakpoint oracle ----------------------------------------------------

    def _branch_piece(self, k: int, i: int) -> AffinePiece:
        """Branch i (0-based) of block k as a full affine piece."""
        a = self.spec.a(k - 1)
        gap = self.spec.gap(k)
        b = self.spec.branches(k)
        w = gap / b
        x0 = a + i * w
        x1 = a + (i + 1) * w if i < b - 1 else self.spec.a(k)
        if i % 2 == 0:
            return AffinePiece(x0, x1, a, a + gap)
        return AffinePiece(x0, x1, a + gap, a)

    def _block_pieces(self, k: int, u: float, v: float) -> Iterator[AffinePiece]:
        """Pieces of block k over [u, v] (both inside the closed block).

        A run of interior full branches is collapsed into one synthetic piece
        whose value range is the whole block [a_{k-1}, a_k] with both ends
        attained — exact for set images, and it keeps deep blocks O(1).
        """
        a = self.spec.a(k - 1)
        a1 = self.spec.a(k)
        b = self.spec.branches(k)
        w = (a1 - a) / b
        i_u = min(int((u - a) / w), b - 1)
        i_v = min(int((v - a) / w), b - 1)
        if i_v > i_u and a + i_v * w >= v:
            i_v -= 1  # cut lands exactly on a branch boundary
        if i_u == i_v:
            piece = self._branch_piece(k, i_u)
            yield AffinePiece(u, v, piece.value_at(u), piece.value_at(v))
            return
        first = self._branch_piece(k, i_u)
        yield AffinePiece(u, first.x1, first.value_at(u), first.y1)
        if i_v > i_u + 1:
            yield AffinePiece(first.x1, a + i_v * w, a, a1)
        last = self._branch_piece(k, i_v)
        yield AffinePiece(last.x0, v, last.y0, last.value_at(v))

    def pieces_in(self, lo: float, hi: float) -> Iterator[AffinePiece]:
        """Monotone affine pieces whose end values carry the exact value range
        of T over [lo, hi], clipped to it.

        Each block maps onto itself, so runs of whole blocks inside the query
        (and the accumulation tail at 1) are emitted as single identity-range
        pieces rather than branch by branch; consumers computing set images or
        extrema see exactly the true ranges.  Blocks thinner than 1e-12 are
        absorbed into the identity tail (pointwise error below the tail width).
        """
        if lo == hi:
            v = self.eval(lo)
            yield AffinePiece(lo, hi, v, v)
            return
        if lo >= 1.0:
            yield AffinePiece(lo, hi, 1.0, 1.0)
            return
        k_lo = self.spec.locate(lo)
        if k_lo == 0 or self.spec.gap(k_lo) < TAIL_ATOL:
            t1 = min(hi, 1.0)
            yield AffinePiece(lo, t1, lo, t1)
            return
        a_top = self.spec.a(k_lo)
        yield from self._block_pieces(k_lo, lo, min(hi, a_top))
        if hi <= a_top:
            return
        k_hi = self.spec.locate(hi) if hi < 1.0 else 0
        if k_hi == 0 or self.spec.gap(k_hi) < TAIL_ATOL:
            t1 = min(hi, 1.0)
            yield AffinePiece(a_top, t1, a_top, t1)
            return
        a_mid = self.spec.a(k_hi - 1)
        if k_hi > k_lo + 1:
            yield AffinePiece(a_top, a_mid, a_top, a_mid)
        if hi > a_mid:
            yield from self._block_pieces(k_hi, a_mid, hi)

    # -- cylinders -------------------------------------------------------------

    def cylinder(self, s: int, word: tuple[int, ...] | list[int]) -> Cylinder:
        """Exact endpoints of J_s(i_1, ..., i_n) by recursive affine pullback.

        Letters are 1-based branch indices; orientation of the decreasing
        branches is honored so that T^j maps the cylinder onto the cylinder of
        the shifted word.
        """
        word = tuple(int(i) for i in word)
        b = self.spec.branches(s)
        for letter in word:
            if not 1 <= letter <= b:
                raise DomainError(f"letter {letter} outside 1..{b}")
        a = self.spec.a(s - 1)
        a1 = self.spec.a(s)
        gap = a1 - a
        w = gap / b
        lo, hi = a, a1
        for letter in reversed(word):
            i = letter - 1
            x0 = a + i * w
            if i % 2 == 0:  # rising branch: preimage keeps orientation
                nlo = x0 + (lo - a) / b
                nhi = x0 + (hi - a) / b
            else:  # falling branch: preimage flips
                nlo = x0 + (a1 - hi) / b
                nhi = x0 + (a1 - lo) / b
            lo, hi = nlo, nhi
        return Cylinder(s, word, lo, hi)

    # -- closed forms -----------------------------------------------------------

    def holder_constant(self, k: int, alpha: float) -> float:
        """Maximal distortion H_k(alpha) = |J_k| / eps_k^alpha inside block k."""
        if not 0.0 < alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        return math.exp(self.spec.log_gap(k) - alpha * self.spec.log_epsilon(k))

    def holder_constants(self, k_max: int, alpha: float) -> np.ndarray:
        return np.array([self.holder_constant(k, alpha) for k in range(1, k_max + 1)])

    def mdim_formula(self, k_max: int | None = None) -> MdimReport:
        """Ratio ladder log b_k / log(1/eps_k) and its tail extremes.

        The tail max/min over the last 10% of indices stand in for the
        limsup/liminf; ``holder_sup`` is 1 - upper by definition.
        """
        k_max = int(k_max if k_max is not None else self.spec.k_max)
        if k_max < 10:
            raise ParameterError("k_max < 10 leaves the tail window undefined")
        if self.spec.finite:
            k_max = min(k_max, self.spec.n_terms)
            if k_max < 10:
                raise ParameterError("explicit list too short for a tail window")
        ks = np.arange(1, k_max + 1)
        log_b = np.array([self.spec.log_branches(int(k)) for k in ks])
        log_eps = np.array([self.spec.log_epsilon(int(k)) for k in ks])
        ratio = log_b / (-log_eps)
        w = tail_window(k_max)
        tail = ratio[-w:]
        upper = float(tail.max())
        lower = float(tail.min())
        return MdimReport(upper=upper, lower=lower, holder_sup=1.0 - upper,
                          k_max=k_max, ratio_k=ratio)


def zigzag(branches: int = 3) -> HorseshoeMap:
    """Single-block map with `branches` full branches on [0, 1]."""
    return HorseshoeMap(ParameterSpec.explicit([1.0], [branches]))
