"""Parameter sequences (a_k), (b_k) for the horseshoe family of interval maps.

A parameter spec picks a gap sequence |J_k| = a_k - a_{k-1} summing to 1 and a
sequence b_k of odd branch counts.  Three named presets are built in:

* ``preset1``  -- gaps 6/(pi^2 k^2), b_k = 3^k.  (The classical normalization
  constant is 6/pi^2, so the gaps sum exactly to 1.)
* ``preset2``  -- gaps C(beta) 3^(k(1-1/beta)) with the normalizing constant
  C(beta) making the gaps sum to 1, b_k = 3^k; beta in (0, 1).
* ``preset3``  -- gaps 2^(-k), b_k = 2k+1.

Sequences are conceptually infinite; the prefix of partial sums is extended
lazily (and under a lock, so a shared spec is safe for concurrent readers).
All real comparisons in validation use an absolute tolerance of 1e-12 with a
1e-15 rounding guard on strictness checks.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

ABS_TOL = 1e-12
STRICT_GUARD = 1e-15

# Gap below which lazy block enumeration gives up and treats the remaining
# tail [a_k, 1] as fixed points (double precision is exhausted well before).
TAIL_FLOOR = 1e-15
MAX_LAZY_BLOCKS = 2_000_000


class ParameterError(ValueError):
    """Structurally unusable spec (bad rule, non-finite value, bad index)."""


class RuleEvaluationError(ParameterError):
    """A closed-form rule produced a non-finite value."""


@dataclass(frozen=True)
class Violation:
    condition: str  # "C1" | "C2" | "C3" | "odd"
    k: int          # first offending index

    def as_tuple(self) -> tuple[str, int]:
        return (self.condition, self.k)


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def first_index(self, condition: str) -> int | None:
        for v in self.violations:
            if v.condition == condition:
                return v.k
        return None


# ---------------------------------------------------------------------------
# gap / branch rules (fixed enumerated set; no symbolic algebra)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricGaps:
    """gap_k = scale * ratio^k, 0 < ratio < 1."""

    scale: float
    ratio: float

    def gap(self, k: int) -> float:
        return self.scale * self.ratio ** k

    def log_gap(self, k: int) -> float:
        return math.log(self.scale) + k * math.log(self.ratio)

    def partial_sum(self, k: int) -> float:
        r = self.ratio
        return self.scale * r * (1.0 - r ** k) / (1.0 - r)

    def total(self) -> float:
        r = self.ratio
        return self.scale * r / (1.0 - r)


@dataclass(frozen=True)
class InverseSquareGaps:
    """gap_k = scale / k^2.  Normalized to 1 when scale = 6/pi^2."""

    scale: float

    def gap(self, k: int) -> float:
        return self.scale / (k * k)

    def log_gap(self, k: int) -> float:
        return math.log(self.scale) - 2.0 * math.log(k)

    def partial_sum(self, k: int) -> float:  # pragma: no cover - cached path used
        return self.scale * float(np.sum(1.0 / np.arange(1.0, k + 1.0) ** 2))

    def total(self) -> float:
        return self.scale * (math.pi ** 2 / 6.0)


@dataclass(frozen=True)
class PowerBranches:
    """b_k = base^k with odd base >= 3."""

    base: int

    def branches(self, k: int) -> int:
        return self.base ** k

    def log_branches(self, k: int) -> float:
        return k * math.log(self.base)


@dataclass(frozen=True)
class OddArithmeticBranches:
    """b_k = start + step*(k-1); start odd, step even keeps every term odd."""

    start: int = 3
    step: int = 2

    def branches(self, k: int) -> int:
        return self.start + self.step * (k - 1)

    def log_branches(self, k: int) -> float:
        return math.log(self.branches(k))


@dataclass(frozen=True)
class ExplicitGaps:
    gaps: tuple[float, ...]

    def gap(self, k: int) -> float:
        if k > len(self.gaps):
            raise ParameterError(f"gap index {k} beyond explicit list of length {len(self.gaps)}")
        return self.gaps[k - 1]

    def log_gap(self, k: int) -> float:
        return math.log(self.gap(k))

    def total(self) -> float:
        return float(sum(self.gaps))


@dataclass(frozen=True)
class ExplicitBranches:
    branches_list: tuple[int, ...]

    def branches(self, k: int) -> int:
        if k > len(self.branches_list):
            raise ParameterError(
                f"branch index {k} beyond explicit list of length {len(self.branches_list)}"
            )
        return self.branches_list[k - 1]

    def log_branches(self, k: int) -> float:
        return math.log(self.branches(k))


# ---------------------------------------------------------------------------
# ParameterSpec
# ---------------------------------------------------------------------------

class ParameterSpec:
    """The pair of sequences defining one member of the horseshoe family.

    ``kind`` is one of ``preset1``, ``preset2``, ``preset3``, ``explicit``,
    ``closed_form``.  ``k_max`` is the truncation horizon used by validation
    and by the closed-form dimension report; evaluation beyond it extends the
    cached prefix lazily.
    """

    def __init__(self, kind: str, gap_rule, branch_rule, k_max: int = 64, beta: float | None = None):
        if k_max < 1:
            raise ParameterError("k_max must be a positive integer")
        self.kind = kind
        self.beta = beta
        self._gaps = gap_rule
        self._branches = branch_rule
        self.k_max = int(k_max)
        self._lock = threading.Lock()
        # cached partial sums a_0..a_n (a_0 = 0); grown append-only under lock
        self._a = [0.0]
        self._exhausted = False  # gap fell below TAIL_FLOOR or hard cap hit

    # -- constructors -------------------------------------------------------

    @classmethod
    def preset1(cls, k_max: int = 64) -> "ParameterSpec":
        scale = 6.0 / math.pi ** 2
        return cls("preset1", InverseSquareGaps(scale), PowerBranches(3), k_max)

    @classmethod
    def preset2(cls, beta: float, k_max: int = 64) -> "ParameterSpec":
        if not 0.0 < beta < 1.0:
            raise ParameterError("preset2 requires beta in (0, 1)")
        ratio = 3.0 ** (1.0 - 1.0 / beta)
        scale = (1.0 - ratio) / ratio  # makes sum_k scale*ratio^k = 1
        return cls("preset2", GeometricGaps(scale, ratio), PowerBranches(3), k_max, beta=beta)

    @classmethod
    def preset3(cls, k_max: int = 64) -> "ParameterSpec":
        return cls("preset3", GeometricGaps(1.0, 0.5), OddArithmeticBranches(3, 2), k_max)

    @classmethod
    def explicit(cls, gaps: Iterable[float], branches: Iterable[int], k_max: int | None = None) -> "ParameterSpec":
        g = tuple(float(x) for x in gaps)
        b = tuple(int(x) for x in branches)
        if not g or len(g) != len(b):
            raise ParameterError("explicit spec needs equal-length nonempty gap and branch lists")
        if any(not math.isfinite(x) or x <= 0.0 for x in g):
            raise RuleEvaluationError("explicit gaps must be finite and positive")
        return cls("explicit", ExplicitGaps(g), ExplicitBranches(b), k_max or len(g))

    @classmethod
    def closed_form(cls, gap_rule, branch_rule, k_max: int = 64) -> "ParameterSpec":
        return cls("closed_form", gap_rule, branch_rule, k_max)

    # -- sequence access -----------------------------------------------------

    @property
    def finite(self) -> bool:
        return isinstance(self._gaps, ExplicitGaps)

    @property
    def n_terms(self) -> int | None:
        return len(self._gaps.gaps) if self.finite else None

    def gap(self, k: int) -> float:
        if k < 1:
            raise ParameterError("block index k starts at 1")
        g = self._gaps.gap(k)
        if not math.isfinite(g) or g <= 0.0:
            raise RuleEvaluationError(f"gap rule produced {g!r} at k={k}")
        return g

    def log_gap(self, k: int) -> float:
        if k < 1:
            raise ParameterError("block index k starts at 1")
        return self._gaps.log_gap(k)

    def branches(self, k: int) -> int:
        if k < 1:
            raise ParameterError("block index k starts at 1")
        return self._branches.branches(k)

    def log_branches(self, k: int) -> float:
        if k < 1:
            raise ParameterError("block index k starts at 1")
        return self._branches.log_branches(k)

    def epsilon(self, k: int) -> float:
        """Width |J_k| / b_k of one injectivity domain in block k."""
        return self.gap(k) / self.branches(k)

    def log_epsilon(self, k: int) -> float:
        return self.log_gap(k) - self.log_branches(k)

    def a(self, k: int) -> float:
        """Partial sum a_k (left endpoint of block k+1); a_0 = 0."""
        if k < 0:
            raise ParameterError("a_k defined for k >= 0")
        self._extend_to(k)
        if k >= len(self._a):
            raise ParameterError(f"a_{k} not reachable (sequence exhausted at {len(self._a) - 1})")
        return self._a[k]

    def _extend_to(self, k: int) -> None:
        if k < len(self._a) or self._exhausted:
            return
        with self._lock:
            while len(self._a) <= k:
                idx = len(self._a)
                if self.finite and idx > len(self._gaps.gaps):
                    raise ParameterError(f"block {idx} beyond explicit list")
                g = self.gap(idx)
                if g < TAIL_FLOOR or idx > MAX_LAZY_BLOCKS:
                    self._exhausted = True
                    return
                self._a.append(self._a[-1] + g)

    def locate(self, x: float) -> int:
        """Block index k with a_{k-1} <= x < a_k (right-open convention).

        Returns 0 when the prefix is exhausted before reaching x, i.e. x sits
        in the sub-resolution tail where T is a fixed point to within 1e-15.
        """
        if not 0.0 <= x < 1.0:
            raise ParameterError("locate expects x in [0, 1)")
        while self._a[-1] <= x:
            if self._exhausted or (self.finite and len(self._a) > len(self._gaps.gaps)):
                return 0
            before = len(self._a)
            self._extend_to(len(self._a))
            if len(self._a) == before:
                return 0
        lo = int(np.searchsorted(np.asarray(self._a), x, side="right"))
        return lo  # a_{lo-1} <= x < a_lo

    def prefix_array(self, upto_x: float) -> np.ndarray:
        """Cached partial sums as an array covering at least [0, upto_x]."""
        while self._a[-1] <= upto_x and not self._exhausted:
            if self.finite and len(self._a) > len(self._gaps.gaps):
                break
            before = len(self._a)
            self._extend_to(len(self._a))
            if len(self._a) == before:
                break
        return np.asarray(self._a)

    # -- validation ----------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check (C1)-(C3) and oddness up to k_max; empty report iff valid.

        C1: a_0 = 0, strictly increasing, partial sums never exceed 1; for
        closed-form presets the analytic total must equal 1 to 1e-12.
        C2: gaps strictly decreasing to zero.
        C3: b_k strictly increasing; all b_k odd positive integers.
        """
        report = ValidationReport()
        kmax = self.k_max if not self.finite else len(self._gaps.gaps)

        gaps = []
        for k in range(1, kmax + 1):
            gaps.append(self.gap(k))  # raises RuleEvaluationError on bad rules

        partial = 0.0
        c1_k = None
        for k, g in enumerate(gaps, start=1):
            partial += g
            if partial > 1.0 + ABS_TOL:
                c1_k = k
                break
        if c1_k is None and not self.finite:
            total = self._gaps.total()
            if not math.isfinite(total) or abs(total - 1.0) > ABS_TOL:
                c1_k = kmax
        if c1_k is not None:
            report.violations.append(Violation("C1", c1_k))

        for k in range(2, kmax + 1):
            # strict decrease with a relative rounding guard: equal-to-within-
            # float-noise gaps count as not decreasing
            if not gaps[k - 1] < gaps[k - 2] * (1.0 - 1e-12):
                report.violations.append(Violation("C2", k))
                break

        b_prev = None
        odd_k = None
        c3_k = None
        for k in range(1, kmax + 1):
            b = self.branches(k)
            if odd_k is None and (b <= 0 or b % 2 == 0):
                odd_k = k
            if c3_k is None and b_prev is not None and not b > b_prev:
                c3_k = k
            b_prev = b
        if c3_k is not None:
            report.violations.append(Violation("C3", c3_k))
        if odd_k is not None:
            report.violations.append(Violation("odd", odd_k))

        return report

    def __repr__(self) -> str:
        extra = f", beta={self.beta}" if self.beta is not None else ""
        return f"ParameterSpec(kind={self.kind!r}{extra}, k_max={self.k_max})"


# ---------------------------------------------------------------------------
# JSON config
# ---------------------------------------------------------------------------

def spec_from_config(config) -> ParameterSpec:
    """Build a spec from a JSON string / dict.

    Schema::

        {"kind": "preset1", "k_max": 64}
        {"kind": "preset2", "beta": 0.5, "k_max": 64}
        {"kind": "preset3", "k_max": 64}
        {"kind": "explicit", "gaps": [...], "branches": [...]}
        {"kind": "closed_form", "k_max": 64,
         "gap": {"rule": "geometric", "ratio": r, "scale": c}
              | {"rule": "inverse_square", "scale": c},
         "branch": {"rule": "power", "base": m}
                 | {"rule": "odd_arithmetic", "start": 3, "step": 2}}
    """
    if isinstance(config, str):
        config = json.loads(config)
    if not isinstance(config, dict) or "kind" not in config:
        raise ParameterError("config must be a JSON object with a 'kind' field")
    kind = config["kind"]
    k_max = int(config.get("k_max", 64))
    if kind == "preset1":
        return ParameterSpec.preset1(k_max)
    if kind == "preset2":
        if "beta" not in config:
            raise ParameterError("preset2 config requires 'beta'")
        return ParameterSpec.preset2(float(config["beta"]), k_max)
    if kind == "preset3":
        return ParameterSpec.preset3(k_max)
    if kind == "explicit":
        return ParameterSpec.explicit(config["gaps"], config["branches"])
    if kind == "closed_form":
        gap_cfg = dict(config["gap"])
        branch_cfg = dict(config["branch"])
        gr = gap_cfg.pop("rule")
        if gr == "geometric":
            gap_rule = GeometricGaps(float(gap_cfg["scale"]), float(gap_cfg["ratio"]))
        elif gr == "inverse_square":
            gap_rule = InverseSquareGaps(float(gap_cfg["scale"]))
        else:
            raise ParameterError(f"unknown gap rule {gr!r}")
        br = branch_cfg.pop("rule")
        if br == "power":
            branch_rule = PowerBranches(int(branch_cfg["base"]))
        elif br == "odd_arithmetic":
            branch_rule = OddArithmeticBranches(int(branch_cfg.get("start", 3)), int(branch_cfg.get("step", 2)))
        else:
            raise ParameterError(f"unknown branch rule {br!r}")
        return ParameterSpec.closed_form(gap_rule, branch_rule, k_max)
    raise ParameterError(f"unknown spec kind {kind!r}")
