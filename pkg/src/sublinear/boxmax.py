"""Exact sublinear expectations of functions of maximal i.i.d. samples.

If ``X_1..X_n`` are i.i.d. with maximal distribution ``M[lo, hi]`` then
``E[f(X_1..X_n)]`` is the maximum of ``f`` over the cube ``[lo, hi]^n``.
:func:`box_maximize` computes that maximum jointly (grid scan, then compass
search from the best cells); :func:`nested_maximize` computes it one
coordinate at a time, innermost last, the way the expectation unfolds for a
sequentially independent sample. The two routes are meant to agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import TestFunction

DEFAULT_TOL = 1e-6
DEFAULT_BUDGET = 100_000
MAX_DIM = 10
_BLOCK = 1 << 16


@dataclass(frozen=True)
class Box:
    """The hypercube ``[lower, upper]^dim``."""

    lower: float
    upper: float
    dim: int

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("box bounds must be finite")
        if self.lower > self.upper:
            raise ValueError(f"empty box: lower {self.lower} > upper {self.upper}")
        if self.dim < 1:
            raise ValueError("box dimension must be positive")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(x.shape == (self.dim,) and np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class OptResult:
    value: float
    argmax: np.ndarray
    certificate_gap: float | None  # true max <= value + gap, when a Lipschitz constant is known
    evaluations: int
    warning: str | None = None

    @property
    def converged(self) -> bool:
        return self.warning is None


class _Counted:
    def __init__(self, f: TestFunction):
        self.f = f
        self.count = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.count += x.shape[0]
        return np.asarray(self.f(x), dtype=float)


def grid_points_per_axis(budget: int, dim: int) -> int:
    """Largest ``g >= 2`` with ``g**dim <= budget`` (2 if even that is too many)."""
    g = max(2, int(math.floor(budget ** (1.0 / dim))))
    while g > 2 and g**dim > budget:
        g -= 1
    while (g + 1) ** dim <= budget:
        g += 1
    return g


def _grid_scan(f: _Counted, axis: np.ndarray, dim: int) -> np.ndarray:
    g = axis.size
    total = g**dim
    values = np.empty(total)
    shape = (g,) * dim
    for start in range(0, total, _BLOCK):
        flat = np.arange(start, min(start + _BLOCK, total))
        pts = axis[np.stack(np.unravel_index(flat, shape), axis=-1)]
        values[start : start + flat.size] = f(pts)
    return values


def _compass(f: _Counted, x, v, lo, hi, step, step_min, max_evals):
    """Coordinate pattern search; returns (x, v, converged)."""
    d = x.size
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    used = 0
    while step >= step_min:
        if used + 2 * d > max_evals:
            return x, v, False
        cand = np.clip(x + step * dirs, lo, hi)
        vals = f(cand)
        used += 2 * d
        j = int(np.argmax(vals))
        if vals[j] > v:
            x, v = cand[j], float(vals[j])
        else:
            step *= 0.5
    return x, v, True


def box_maximize(
    f: TestFunction,
    box: Box,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    starts: int = 8,
    allow_high_dim: bool = False,
) -> OptResult:
    """Maximize ``f`` over ``box``.

    Half of ``budget`` goes to a uniform grid with ``grid_points_per_axis``
    points per axis (endpoints included), the rest to compass searches started
    from the ``starts`` best grid points. Grid ties resolve to the
    lexicographically smallest point. If ``f`` carries a Lipschitz constant
    ``L``, ``certificate_gap = L * h * sqrt(dim) / 2`` with ``h`` the grid
    spacing. When the budget runs out before a search converges the result
    carries a ``warning``.
    """
    if f.arity != box.dim:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, box has dim {box.dim}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if budget < 1:
        raise ValueError("budget must be positive")
    if box.dim > MAX_DIM and not allow_high_dim:
        raise ValueError(f"dim {box.dim} > {MAX_DIM}: pass allow_high_dim=True to grid-search anyway")
    fc = _Counted(f)
    dim = box.dim
    if box.degenerate:
        x = np.full(dim, box.lower)
        return OptResult(float(fc(x[None, :])[0]), x, 0.0, fc.count)

    g = grid_points_per_axis(max(1, budget // 2), dim)
    axis = np.linspace(box.lower, box.upper, g)
    values = _grid_scan(fc, axis, dim)
    order = np.argsort(-values, kind="stable")[: max(1, starts)]
    shape = (g,) * dim
    h = box.width / (g - 1)
    step_min = max(box.width * 1e-10, 1e-3 * math.sqrt(tol) * box.width * 1e-3)

    best_x = axis[np.array(np.unravel_index(order[0], shape))]
    best_v = float(values[order[0]])
    warning = None
    remaining = budget - fc.count - 1  # one re-evaluation at the end
    per_start = max(0, remaining // len(order))
    for flat in order:
        x0 = axis[np.array(np.unravel_index(flat, shape))]
        x, v, ok = _compass(fc, x0, float(values[flat]), box.lower, box.upper, h, step_min, per_start)
        if not ok:
            warning = "budget exhausted before local refinement converged"
        if v > best_v:
            best_x, best_v = x, v

    # report f at the returned point exactly as a one-row batch evaluates it
    best_x = np.asarray(best_x, dtype=float)
    best_v = float(fc(best_x[None, :])[0])
    gap = None
    if f.lipschitz_constant is not None:
        gap = f.lipschitz_constant * h * math.sqrt(dim) / 2
    return OptResult(best_v, best_x, gap, fc.count, warning)


def _zoom_rounds(width: float, h: float, tol: float) -> int:
    target = max(width * 1e-12, 0.1 * math.sqrt(tol) * width)
    return max(0, math.ceil(math.log2(h / target))) if h > target else 0


def _layer(fc: _Counted, prefix: np.ndarray, n: int, axis: np.ndarray, lo: float, hi: float, rounds: int):
    """Maximize over the next coordinate for each row of ``prefix``.

    Returns the maximized values, shape ``(B,)``, and the maximizing tail
    coordinates, shape ``(B, n - k)``, where ``k`` is the prefix length.
    """
    B, k = prefix.shape
    rest = n - k

    def g(c: np.ndarray):
        q = c.shape[1]
        pts = np.concatenate([np.repeat(prefix, q, axis=0), c.reshape(-1, 1)], axis=1)
        if rest == 1:
            vals, tails = fc(pts), np.empty((B * q, 0))
        else:
            vals, tails = _layer(fc, pts, n, axis, lo, hi, rounds)
        return vals.reshape(B, q), tails.reshape(B, q, rest - 1)

    m = axis.size
    vals, tails = g(np.broadcast_to(axis, (B, m)))
    j = np.argmax(vals, axis=1)
    rows = np.arange(B)
    best_c = axis[j].copy()
    best_v = vals[rows, j].copy()
    best_t = tails[rows, j].copy()
    h = (hi - lo) / (m - 1) if m > 1 else 0.0
    # the incumbent's neighbours at distance h are never better; halve h each round
    for _ in range(rounds):
        h *= 0.5
        c = np.clip(best_c[:, None] + np.array([-h, h])[None, :], lo, hi)
        v, t = g(c)
        jj = np.argmax(v, axis=1)
        better = v[rows, jj] > best_v
        best_c = np.where(better, c[rows, jj], best_c)
        best_v = np.where(better, v[rows, jj], best_v)
        best_t = np.where(better[:, None], t[rows, jj], best_t)
    return best_v, np.concatenate([best_c[:, None], best_t], axis=1)


def nested_maximize(
    f: TestFunction,
    interval: tuple[float, float],
    n: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
) -> OptResult:
    """Iterated one-dimensional maximization ``max_{x1} ... max_{xn} f``.

    The innermost layer is ``f_{n-1}(x_1..x_{n-1}) = max_{x_n} f``; each outer
    layer maximizes the function produced by the layer inside it. Every 1-D
    problem is a grid of ``grid_points_per_axis(budget // 2, n)`` points
    followed by bisection-style zooming around the best point. Evaluations
    grow geometrically in ``n``; there is no dimension guard.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if f.arity != n:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, n is {n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    fc = _Counted(f)
    if lo == hi:
        x = np.full(n, lo)
        return OptResult(float(fc(x[None, :])[0]), x, 0.0, fc.count)
    m = grid_points_per_axis(max(1, budget // 2), n)
    axis = np.linspace(lo, hi, m)
    rounds = _zoom_rounds(hi - lo, (hi - lo) / (m - 1), tol)
    vals, arg = _layer(fc, np.empty((1, 0)), n, axis, lo, hi, rounds)
    gap = None
    if f.lipschitz_constant is not None:
        gap = f.lipschitz_constant * (hi - lo) / (m - 1) * math.sqrt(n) / 2
    return OptResult(float(vals[0]), arg[0], gap, fc.count)


def sublinear_eval_maximal(
    f: TestFunction,
    mu_lower: float,
    mu_upper: float,
    n: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Sublinear expectation of ``f(X_1..X_n)`` for i.i.d. ``X_i ~ M[mu_lower, mu_upper]``."""
    if mu_lower > mu_upper:
        raise ValueError("mu_lower must not exceed mu_upper")
    if f.arity != n:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, n is {n}")
    return box_maximize(f, Box(mu_lower, mu_upper, n), tol, budget).value
