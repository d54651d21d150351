"""Grouped envelope estimators for a general sublinear distribution.

One i.i.d. stream is cut into disjoint groups, either along the anti-diagonals
of the infinite index matrix (``trn``) or in contiguous blocks. The group
means of ``phi(X)`` behave asymptotically like a maximal sample. Their max
estimates ``E[phi(X)]`` and their min estimates ``-E[-phi(X)]``.

Sample indices are 1-based throughout, matching ``trn``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .expectation import _as_indices
from .functions import TestFunction
from .maximal import MaximalDistribution, sample_path
from .policies import Constant, Policy
from .scenarios import ScenarioFamily, substream


def trn(i: int, k: int) -> int:
    """Index of position ``i`` of group ``k``: ``(i+k)(i+k-1)/2 - (k-1)``."""
    if i < 1 or k < 1:
        raise ValueError(f"trn needs positive arguments, got ({i}, {k})")
    s = i + k
    return s * (s - 1) // 2 - (k - 1)


def trn_array(i, k) -> np.ndarray:
    i = np.asarray(i, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    if np.any(i < 1) or np.any(k < 1):
        raise ValueError("trn needs positive arguments")
    s = i + k
    return s * (s - 1) // 2 - (k - 1)


def inverse_trn(m: int) -> tuple[int, int]:
    """The unique ``(i, k)`` with ``trn(i, k) == m``."""
    if m < 1:
        raise ValueError("sample indices start at 1")
    t = (math.isqrt(8 * m + 1) - 1) // 2
    if t * (t + 1) // 2 < m:
        t += 1
    s = t + 1  # i + k on this anti-diagonal
    k = s * (s - 1) // 2 - m + 1
    return s - k, k


def group_indices(k: int, n: int) -> np.ndarray:
    """Sample indices of group ``k``, positions ``1..n``."""
    return trn_array(np.arange(1, n + 1), k)


@dataclass(frozen=True)
class GroupedEstimate:
    phi_label: str
    group_size: int
    group_count: int
    group_means: np.ndarray
    upper_envelope: float  # max of group means
    lower_envelope: float  # min of group means (dual construction)
    dropped: int = 0
    scheme: str = "triangle"


def _phi_values(phi: TestFunction, x: np.ndarray) -> np.ndarray:
    return phi.scalar(x)


def group_mean(samples, phi: TestFunction, k: int, n: int) -> float:
    """``(1/n) * sum_{i<=n} phi(X_trn(i,k))``."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    idx = group_indices(k, n)
    missing = idx[idx > x.size]
    if missing.size:
        raise ValueError(f"sample index {int(missing.min())} needed by group {k} but only {x.size} samples given")
    return float(np.mean(_phi_values(phi, x[idx - 1])))


def envelope_estimator(samples, phi: TestFunction, k: int, n: int) -> GroupedEstimate:
    """Triangle-order group means ``M_{1,n} .. M_{k,n}`` and their max/min."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    idx = np.concatenate([group_indices(j, n) for j in range(1, k + 1)])
    missing = idx[idx > x.size]
    if missing.size:
        raise ValueError(
            f"sample index {int(missing.min())} needed but only {x.size} samples given (need {trn(n, k)})"
        )
    means = _phi_values(phi, x[idx - 1]).reshape(k, n).mean(axis=1)
    return GroupedEstimate(phi.label, n, k, means, float(means.max()), float(means.min()))


def block_envelope(samples, phi: TestFunction, group_size: int) -> GroupedEstimate:
    """Contiguous blocks of ``group_size``; the short tail is dropped and counted."""
    n = group_size
    if n < 1:
        raise ValueError("group_size must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < n:
        raise ValueError(f"need at least {n} samples for one group, got {x.size}")
    k = x.size // n
    blocks = _phi_values(phi, x[: k * n]).reshape(k, n)
    means = blocks.mean(axis=1)
    return GroupedEstimate(phi.label, n, k, means, float(means.max()), float(means.min()), x.size - k * n, "block")


def triangle_stream(draw_group: Callable[[int, int], np.ndarray], n: int, k: int) -> np.ndarray:
    """Stream of length ``trn(n, k)`` whose group-``j`` positions come from ``draw_group(j, n)``.

    Only the positions read by groups ``1..k`` (first ``n`` each) are filled;
    every other index is NaN.
    """
    out = np.full(trn(n, k), np.nan)
    for j in range(1, k + 1):
        out[group_indices(j, n) - 1] = np.asarray(draw_group(j, n), dtype=float)
    return out


def maximal_group_stream(
    M: MaximalDistribution, group_policies: Sequence[Policy], n: int, k: int, seed: int = 0
) -> np.ndarray:
    """Triangle-order stream of a maximal sample; group ``j`` follows policy ``(j-1) mod len``.

    Each group is a path from :func:`sample_path` on its own substream.
    """
    if not group_policies:
        raise ValueError("at least one group policy is required")
    pols = list(group_policies)
    return triangle_stream(lambda j, size: sample_path(M, pols[(j - 1) % len(pols)], size, seed, j).values, n, k)


def grid_sweep_policies(M: MaximalDistribution, points: int) -> list[Policy]:
    """Constant value policies on an equally spaced grid of the interval."""
    return [Constant(float(y)) for y in np.linspace(M.mu_lower, M.mu_upper, points)]


@dataclass(frozen=True)
class AsymptoticRow:
    n: int
    k: int
    estimate: float
    reference: float
    gap: float
    std_error: float
    policy: str


def asymptotic_unbiasedness_experiment(
    family: ScenarioFamily,
    policies: Sequence[Policy],
    phi: TestFunction,
    n_schedule: Sequence[int],
    k: int,
    replications: int = 100,
    seed: int = 0,
    reference: float | None = None,
) -> list[AsymptoticRow]:
    """Upper envelope ``T_k[phi]`` against ``E[phi(X)]`` for growing group sizes.

    Policies act per group: group ``j`` is generated by the scenario the
    policy schedules at step ``j``. For each ``n`` the row reports the largest,
    over policies, of the replication mean of ``T_k``. The reference defaults
    to ``max_theta E_theta[phi]`` from the family's exact moments.
    """
    if not policies:
        raise ValueError("at least one policy is required")
    if any(p.adaptive for p in policies):
        raise ValueError("group-level policies must be non-adaptive")
    if reference is None:
        reference = family.exact_upper(phi.scalar)
        if reference is None:
            raise ValueError("family lacks exact expectations; pass reference explicitly")
    rows = []
    for a, n in enumerate(n_schedule):
        best = None
        for p, pol in enumerate(policies):
            vals = np.empty(replications)
            for r in range(replications):
                rng = substream(seed, a, p, r)
                acts = _as_indices(pol.schedule(1, k, rng)[0], len(family))
                stream = triangle_stream(lambda j, size: family[acts[j - 1]].sample(rng, size), n, k)
                vals[r] = envelope_estimator(stream, phi, k, n).upper_envelope
            est = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(replications)) if replications > 1 else 0.0
            if best is None or est > best[0]:
                best = (est, se, pol.label)
        rows.append(AsymptoticRow(n, k, best[0], reference, abs(best[0] - reference), best[1], best[2]))
    return rows
