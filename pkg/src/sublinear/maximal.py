"""The one-dimensional maximal distribution ``M[mu_lower, mu_upper]``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxmax import DEFAULT_BUDGET, DEFAULT_TOL, Box, box_maximize, sublinear_eval_maximal
from .functions import TestFunction
from .policies import History, Policy
from .scenarios import ScenarioFamily, dirac_grid, substream


@dataclass(frozen=True)
class MaximalDistribution:
    mu_lower: float
    mu_upper: float

    def __post_init__(self):
        if self.mu_lower > self.mu_upper:
            raise ValueError(f"mu_lower {self.mu_lower} exceeds mu_upper {self.mu_upper}")

    @property
    def degenerate(self) -> bool:
        return self.mu_lower == self.mu_upper

    def clamp(self, x):
        return np.clip(x, self.mu_lower, self.mu_upper)

    def dirac_family(self, points: int) -> ScenarioFamily:
        """Point masses on a grid of the interval, a finite stand-in for ``{delta_y}``."""
        return dirac_grid(self.mu_lower, self.mu_upper, points)


@dataclass(frozen=True)
class PathSample:
    values: np.ndarray
    clamped: int = 0  # policy outputs that fell outside the interval


def dist_op(phi: TestFunction, M: MaximalDistribution, tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> float:
    """``E[phi(eta)] = max_{y in [mu_lower, mu_upper]} phi(y)``."""
    if phi.arity != 1:
        raise ValueError("dist_op needs a function of one variable")
    return box_maximize(phi, Box(M.mu_lower, M.mu_upper, 1), tol, budget).value


def pushforward_params(
    f: TestFunction, M: MaximalDistribution, n: int, tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET
) -> MaximalDistribution:
    """Parameters of ``f(X_1..X_n)``, which is again maximal: ``[min f, max f]`` over the cube."""
    if f.arity != n:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, n is {n}")
    upper = sublinear_eval_maximal(f, M.mu_lower, M.mu_upper, n, tol, budget)
    lower = -sublinear_eval_maximal(-f, M.mu_lower, M.mu_upper, n, tol, budget)
    # optimizer noise must not produce an empty interval
    return MaximalDistribution(min(lower, upper), max(lower, upper))


def sample_path(M: MaximalDistribution, policy: Policy, n: int, seed: int = 0, stream: int = 0) -> PathSample:
    """A path ``y_1..y_n`` where the policy picks each value (a Dirac scenario).

    Outputs outside the interval are clamped and counted, not rejected.
    ``stream`` selects an independent substream of ``seed``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = substream(seed, stream)
    if not policy.adaptive:
        raw = np.asarray(policy.schedule(1, n, rng)[0], dtype=float)
        values = M.clamp(raw)
        return PathSample(values, int(np.count_nonzero(values != raw)))
    values = np.empty((1, n))
    running = np.zeros(1)
    clamped = 0
    for t in range(n):
        raw = float(policy.choose(History(t, values[:, :t], running))[0])
        y = float(M.clamp(raw))
        clamped += y != raw
        values[0, t] = y
        running = running + y
    return PathSample(values[0], clamped)
