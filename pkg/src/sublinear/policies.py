"""Scenario-selection policies.

A policy decides, draw by draw, which scenario (or, for maximal samples,
which value) generates the next observation. Actions are scenario indices for
:mod:`sublinear.expectation` and real values for :mod:`sublinear.maximal`.

All policies work on a batch of independent paths at once. Non-adaptive
policies expose :meth:`Policy.schedule`; adaptive ones expose
:meth:`Policy.choose`, which sees the history of every path in the batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class History:
    """What a feedback rule may look at before step ``t`` (0-based)."""

    t: int
    values: np.ndarray  # (batch, t) observations so far
    running_sum: np.ndarray  # (batch,) row sums of ``values``

    @property
    def batch(self) -> int:
        return self.running_sum.shape[0]


class Policy:
    adaptive = False
    label = "policy"

    def schedule(self, batch: int, horizon: int, rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def choose(self, history: History) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Policy):
    action: float

    @property
    def label(self) -> str:
        return f"constant({self.action:g})"

    def schedule(self, batch, horizon, rng=None):
        return np.full((batch, horizon), self.action)


@dataclass(frozen=True)
class CyclicSchedule(Policy):
    actions: tuple

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.actions:
            raise ValueError("a cyclic schedule needs at least one action")

    @property
    def label(self) -> str:
        return "cyclic(" + ",".join(f"{a:g}" for a in self.actions) + ")"

    def schedule(self, batch, horizon, rng=None):
        row = np.resize(np.asarray(self.actions, dtype=float), horizon)
        return np.broadcast_to(row, (batch, horizon)).copy()


@dataclass(frozen=True)
class RandomMixture(Policy):
    """I.i.d. random actions drawn with ``weights`` from ``support``.

    ``support`` defaults to the indices ``0 .. len(weights)-1``.
    """

    weights: tuple
    support: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be a nonempty nonnegative vector with positive sum")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        if self.support is not None:
            object.__setattr__(self, "support", tuple(float(s) for s in self.support))
            if len(self.support) != w.size:
                raise ValueError("support and weights must have the same length")

    @property
    def label(self) -> str:
        return f"mixture({len(self.weights)})"

    def schedule(self, batch, horizon, rng=None):
        if rng is None:
            raise ValueError("RandomMixture needs a random generator")
        p = np.asarray(self.weights) / sum(self.weights)
        idx = rng.choice(p.size, size=(batch, horizon), p=p)
        if self.support is None:
            return idx.astype(float)
        return np.asarray(self.support)[idx]


@dataclass(frozen=True, eq=False)
class HistoryFeedback(Policy):
    """Adaptive policy: ``rule(history) -> actions`` for every path in the batch.

    The rule must be deterministic in the history.
    """

    rule: Callable[[History], np.ndarray]
    name: str = "feedback"
    adaptive = True

    @property
    def label(self) -> str:
        return self.name

    def choose(self, history: History) -> np.ndarray:
        out = np.asarray(self.rule(history), dtype=float)
        return np.broadcast_to(out, (history.batch,))


def constant_policies(count: int) -> list[Policy]:
    """One constant policy per scenario index."""
    return [Constant(i) for i in range(count)]


def alternating(count: int) -> Policy:
    return CyclicSchedule(tuple(range(count)))


def greedy_terminal(phi: Callable[[np.ndarray], np.ndarray], means: Sequence[float], horizon: int) -> HistoryFeedback:
    """Pick the scenario whose mean, extrapolated to the horizon, maximizes ``phi``.

    At step ``t`` with running sum ``S_t`` the projected terminal average under
    scenario ``j`` is ``(S_t + m_j (horizon - t)) / horizon``. Ties go to the
    lowest index.
    """
    m = np.asarray(means, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("greedy rule needs finite scenario means")

    def rule(h: History) -> np.ndarray:
        proj = (h.running_sum[:, None] + m[None, :] * (horizon - h.t)) / horizon
        return np.argmax(phi(proj), axis=1)

    return HistoryFeedback(rule, "greedy")
