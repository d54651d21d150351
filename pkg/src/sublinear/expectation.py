"""Monte Carlo upper and lower expectations over a finite policy class.

The upper expectation of ``f(X_1, ..., X_h)`` is approximated by the largest,
over the supplied policies, of the sample mean of ``f`` along simulated
paths. Because only finitely many policies are searched, the result is a lower
bound on the true upper expectation (up to Monte Carlo error).

Replication ``r`` under policy number ``p`` always draws from
``substream(seed, p, r)``: per replication, each scenario first draws a full
horizon of values, in scenario order, and then the policy draws its own
randomness. The policy picks which scenario's value is observed at each step.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functions import TestFunction
from .policies import History, Policy
from .scenarios import ScenarioFamily, substream

DEFAULT_REPLICATIONS = 10_000
_CHUNK_FLOATS = 4_000_000


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    std_error: float
    policy_achieving: Policy
    replications: int
    per_policy: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class DualityReport:
    lower: ExpectationEstimate
    upper: ExpectationEstimate
    consistent: bool  # lower <= upper + 3 * combined std error


def _as_indices(actions: np.ndarray, count: int) -> np.ndarray:
    idx = actions.astype(np.int64)
    if np.any(idx != actions) or np.any(idx < 0) or np.any(idx >= count):
        bad = actions[(idx != actions) | (idx < 0) | (idx >= count)].ravel()[0]
        raise ValueError(f"policy produced invalid scenario index {bad!r} (family has {count})")
    return idx


def simulate_paths(
    family: ScenarioFamily,
    policy: Policy,
    horizon: int,
    replications: int,
    seed: int,
    policy_key: int = 0,
    first: int = 0,
):
    """Yield blocks of simulated paths, shape ``(rows, horizon)``, in replication order."""
    count = len(family)
    chunk = max(1, _CHUNK_FLOATS // (count * horizon))
    r = first
    stop = first + replications
    while r < stop:
        rows = min(chunk, stop - r)
        draws = np.empty((rows, count, horizon))
        sched = None if policy.adaptive else np.empty((rows, horizon))
        for b in range(rows):
            rng = substream(seed, policy_key, r + b)
            for j, sc in enumerate(family.scenarios):
                draws[b, j] = sc.sample(rng, horizon)
            if sched is not None:
                sched[b] = policy.schedule(1, horizon, rng)[0]
        if sched is not None:
            idx = _as_indices(sched, count)
            paths = np.take_along_axis(draws, idx[:, None, :], axis=1)[:, 0, :]
        else:
            paths = np.empty((rows, horizon))
            running = np.zeros(rows)
            rows_ix = np.arange(rows)
            for t in range(horizon):
                a = _as_indices(policy.choose(History(t, paths[:, :t], running)), count)
                paths[:, t] = draws[rows_ix, a, t]
                running = running + paths[:, t]
        yield paths
        r += rows


def _mean_and_se(vals: np.ndarray) -> tuple[float, float]:
    if np.all(vals == vals[0]):
        return float(vals[0]), 0.0
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def _policy_estimate(family, policy, f, horizon, replications, seed, key) -> tuple[float, float]:
    vals = np.concatenate([f(p) for p in simulate_paths(family, policy, horizon, replications, seed, key)])
    return _mean_and_se(vals)


def _validate(policies, f, horizon, replications):
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if replications < 1:
        raise ValueError("replications must be positive")
    if f.arity != horizon:
        raise ValueError(f"arity mismatch: {f.label} has arity {f.arity}, horizon is {horizon}")
    if not policies:
        raise ValueError("at least one policy is required")


def upper_expectation_mc(
    family: ScenarioFamily,
    policies: Sequence[Policy],
    f: TestFunction,
    horizon: int,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    threads: int = 1,
) -> ExpectationEstimate:
    """Largest policy-wise Monte Carlo mean of ``f(X_1..X_horizon)``.

    Ties between policies resolve to the earliest one. ``threads`` only changes
    wall time; the result is identical for any value.
    """
    policies = list(policies)
    _validate(policies, f, horizon, replications)

    def run(item):
        key, pol = item
        return _policy_estimate(family, pol, f, horizon, replications, seed, key)

    if threads > 1 and len(policies) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, enumerate(policies)))
    else:
        results = [run(item) for item in enumerate(policies)]
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    value, se = results[best]
    return ExpectationEstimate(value, se, policies[best], replications, tuple(results))


def lower_expectation_mc(
    family: ScenarioFamily,
    policies: Sequence[Policy],
    f: TestFunction,
    horizon: int,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    threads: int = 1,
) -> ExpectationEstimate:
    """``-upper_expectation_mc(-f)``; the achieving policy is the minimizing one."""
    up = upper_expectation_mc(family, policies, -f, horizon, replications, seed, threads)
    return ExpectationEstimate(
        -up.value,
        up.std_error,
        up.policy_achieving,
        replications,
        tuple((-v, se) for v, se in up.per_policy),
    )


def duality_check(
    family: ScenarioFamily,
    policies: Sequence[Policy],
    f: TestFunction,
    horizon: int,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    threads: int = 1,
) -> DualityReport:
    lo = lower_expectation_mc(family, policies, f, horizon, replications, seed, threads)
    up = upper_expectation_mc(family, policies, f, horizon, replications, seed, threads)
    slack = 3 * math.hypot(lo.std_error, up.std_error)
    return DualityReport(lo, up, lo.value <= up.value + slack)
