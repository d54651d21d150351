"""Max/min estimators of the upper/lower mean and checks on candidate estimators.

For a maximal i.i.d. sample, a statistic ``f(X_1..X_n)`` has upper
expectation ``max f`` over ``[mu_lower, mu_upper]^n``. So ``f`` is unbiased
for the upper mean exactly when that box maximum equals ``mu_upper`` for
every parameter pair. :func:`check_unbiased` tests this on a finite grid of
pairs, which can only falsify. :func:`check_dominance` tests the consequence
``f <= max`` pointwise: no unbiased estimator of the upper mean exceeds the
sample maximum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Literal, Sequence

import numpy as np

from .boxmax import DEFAULT_BUDGET, DEFAULT_TOL, Box, box_maximize
from .functions import TestFunction

Target = Literal["upper_mean", "lower_mean"]

UNBIASED = "unbiased"
BIASED = "biased"
INCONCLUSIVE = "inconclusive-at-budget"

DEFAULT_GRID_VALUES = (-2.0, -0.5, 0.0, 0.3, 1.0, 2.5)


def default_grid(values: Sequence[float] = DEFAULT_GRID_VALUES) -> list[tuple[float, float]]:
    """All pairs ``lo <= hi`` from ``values``, degenerate pairs included (21 by default)."""
    return list(combinations_with_replacement(sorted(values), 2))


@dataclass(frozen=True)
class Sample:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty sample")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def _values(sample) -> np.ndarray:
    if isinstance(sample, Sample):
        return sample.values
    return Sample(sample).values


def max_estimator(sample) -> float:
    return float(np.max(_values(sample)))


def min_estimator(sample) -> float:
    return float(np.min(_values(sample)))


def estimate_interval(sample) -> tuple[float, float]:
    """``(min, max)`` of the sample: the optimal estimate of ``[mu_lower, mu_upper]``."""
    v = _values(sample)
    return float(v.min()), float(v.max())


@dataclass(frozen=True)
class EstimatorVerdict:
    target: Target
    verdict: str
    witness: tuple[float, float, float] | None
    grid_tested: tuple[tuple[float, float], ...]
    tol: float
    achieved: tuple[float, ...] = ()
    lipschitz_known: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def unbiased(self) -> bool:
        return self.verdict == UNBIASED

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "verdict": self.verdict,
            "witness": None
            if self.witness is None
            else {"mu_lower": self.witness[0], "mu_upper": self.witness[1], "achieved": self.witness[2]},
            "grid_tested": [list(p) for p in self.grid_tested],
            "achieved": list(self.achieved),
            "tol": self.tol,
            "lipschitz_known": self.lipschitz_known,
            "notes": list(self.notes),
        }


def _target(target: str) -> Target:
    t = {"upper": "upper_mean", "lower": "lower_mean"}.get(target, target)
    if t not in ("upper_mean", "lower_mean"):
        raise ValueError(f"target must be upper_mean or lower_mean, got {target!r}")
    return t  # type: ignore[return-value]


def check_unbiased(
    f: TestFunction,
    n: int,
    target: str = "upper_mean",
    grid: Iterable[tuple[float, float]] | None = None,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
) -> EstimatorVerdict:
    """Test unbiasedness of ``f`` for the upper (or lower) mean on a parameter grid.

    The first converged pair whose box maximum (minimum) misses ``mu_upper``
    (``mu_lower``) by more than ``tol`` becomes the witness. Pairs where the
    optimizer ran out of budget cannot convict; if no pair convicts and some
    ran out, the verdict is ``inconclusive-at-budget``.
    """
    tgt = _target(target)
    if f.arity != n:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, n is {n}")
    pairs = tuple((float(a), float(b)) for a, b in (default_grid() if grid is None else grid))
    if not pairs:
        raise ValueError("parameter grid is empty")
    for a, b in pairs:
        if a > b:
            raise ValueError(f"grid pair ({a}, {b}) has mu_lower > mu_upper")
    g = f if tgt == "upper_mean" else -f
    achieved, witness, stalled = [], None, False
    for lo, hi in pairs:
        res = box_maximize(g, Box(lo, hi, n), tol, budget)
        val = res.value if tgt == "upper_mean" else -res.value
        achieved.append(val)
        want = hi if tgt == "upper_mean" else lo
        if abs(val - want) > tol:
            if res.converged:
                if witness is None:
                    witness = (lo, hi, val)
            else:
                stalled = True
    verdict = BIASED if witness is not None else (INCONCLUSIVE if stalled else UNBIASED)
    notes = ()
    if f.lipschitz_constant is None:
        notes = ("no Lipschitz constant supplied; optimality guarantee assumes Lipschitz estimators",)
    return EstimatorVerdict(tgt, verdict, witness, pairs, tol, tuple(achieved), f.lipschitz_constant is not None, notes)


@dataclass(frozen=True)
class DominanceReport:
    target: Target
    max_gap: float  # max of f - max(x) (upper) or min(x) - f (lower)
    witness: np.ndarray | None  # point attaining a positive gap
    violations: int  # points with gap > tol
    points: int
    tol: float

    @property
    def dominated(self) -> bool:
        return self.violations == 0


def check_dominance(
    f: TestFunction, n: int, points, tol: float = DEFAULT_TOL, target: str = "upper_mean"
) -> DominanceReport:
    """Compare ``f`` with the sample max (upper) or min (lower) at the given points."""
    tgt = _target(target)
    if f.arity != n:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, n is {n}")
    pts = np.asarray(points, dtype=float).reshape(-1, n)
    fx = f(pts)
    gap = fx - pts.max(axis=1) if tgt == "upper_mean" else pts.min(axis=1) - fx
    i = int(np.argmax(gap))
    worst = float(gap[i])
    witness = pts[i].copy() if worst > tol else None
    return DominanceReport(tgt, worst, witness, int(np.count_nonzero(gap > tol)), pts.shape[0], tol)
