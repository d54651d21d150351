"""Simulation harness for the law of large numbers under mean uncertainty.

For an i.i.d. sequence under a sublinear expectation, ``S_N / N`` converges
in law to the maximal distribution on ``[lower mean, upper mean]``:
``E[phi(S_N/N)] -> max phi`` over that interval. The functions here estimate
the left side by Monte Carlo over a policy set and report the gap to the
right side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .boxmax import DEFAULT_TOL
from .expectation import _mean_and_se, lower_expectation_mc, upper_expectation_mc
from .functions import TestFunction, coordinate, of_mean
from .maximal import MaximalDistribution, dist_op
from .policies import Policy, alternating, constant_policies, greedy_terminal
from .scenarios import ScenarioFamily, substream


@dataclass(frozen=True)
class LimitSet:
    """``[theta_lower, theta_upper]``, the support of the limit maximal law (d = 1)."""

    theta_lower: float
    theta_upper: float
    std_error_lower: float = 0.0
    std_error_upper: float = 0.0

    def __post_init__(self):
        if self.theta_lower > self.theta_upper:
            raise ValueError("theta_lower exceeds theta_upper")

    def support(self, p: float) -> float:
        """``g(p) = max_theta p * theta``; ``g(1)`` and ``-g(-1)`` are the endpoints."""
        return p * self.theta_upper if p >= 0 else p * self.theta_lower

    def as_maximal(self) -> MaximalDistribution:
        return MaximalDistribution(self.theta_lower, self.theta_upper)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    estimate: float
    reference: float
    gap: float
    std_error: float
    policy: str = ""


def limit_set_from_family(
    family: ScenarioFamily,
    policies: Sequence[Policy] | None = None,
    replications: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> LimitSet:
    """Upper and lower mean of ``Y_1`` estimated over the policy set (constants by default)."""
    pols = list(policies) if policies is not None else constant_policies(len(family))
    y1 = coordinate(1, 1)
    up = upper_expectation_mc(family, pols, y1, 1, replications, seed, threads)
    lo = lower_expectation_mc(family, pols, y1, 1, replications, seed, threads)
    return LimitSet(lo.value, up.value, lo.std_error, up.std_error)


def known_limit_set(family: ScenarioFamily) -> LimitSet | None:
    """Exact ``[min mean, max mean]`` when every scenario's mean is known and finite."""
    means = family.means
    if any(m is None or not math.isfinite(m) for m in means):
        return None
    return LimitSet(min(means), max(means))


def scenario_means(family: ScenarioFamily, seed: int = 0, size: int = 100_000) -> list[float]:
    """Known means where available, otherwise a Monte Carlo pilot estimate."""
    out = []
    for j, sc in enumerate(family.scenarios):
        if sc.mean is not None:
            out.append(float(sc.mean))
        else:
            out.append(float(sc.sample(substream(seed, 1 << 20, j), size).mean()))
    return out


def default_policies(family: ScenarioFamily, phi: TestFunction, horizon: int, seed: int = 0) -> list[Policy]:
    """Every constant policy, one alternating schedule and the greedy terminal rule."""
    pols = constant_policies(len(family))
    if len(family) > 1:
        pols.append(alternating(len(family)))
        means = scenario_means(family, seed)
        if all(math.isfinite(m) for m in means):
            pols.append(greedy_terminal(phi.scalar, means, horizon))
    return pols


def lln_convergence(
    family: ScenarioFamily,
    phi: TestFunction,
    N_schedule: Sequence[int],
    replications: int = 1000,
    seed: int = 0,
    policies: Sequence[Policy] | None = None,
    limit_set: LimitSet | None = None,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> list[ConvergenceRow]:
    """Estimate ``E[phi(S_N/N)]`` for each ``N`` and compare with ``max phi`` on the limit set.

    Without ``limit_set`` the exact set is used when the scenario means are
    known, otherwise it is estimated first (same seed, ``replications`` draws
    per constant policy).
    """
    if phi.arity != 1:
        raise ValueError("phi must be a function of one variable")
    if limit_set is None:
        limit_set = known_limit_set(family) or limit_set_from_family(family, None, replications, seed, threads)
    reference = dist_op(phi, limit_set.as_maximal(), tol)
    rows = []
    for N in N_schedule:
        pols = list(policies) if policies is not None else default_policies(family, phi, N, seed)
        est = upper_expectation_mc(family, pols, of_mean(phi, N), N, replications, seed, threads)
        rows.append(ConvergenceRow(N, est.value, reference, abs(est.value - reference), est.std_error, est.policy_achieving.label))
    return rows


def strong_convergence_degenerate(
    family: ScenarioFamily,
    mu: float,
    N_schedule: Sequence[int],
    replications: int = 1000,
    seed: int = 0,
    policies: Sequence[Policy] | None = None,
    threads: int = 1,
) -> list[ConvergenceRow]:
    """``E[|S_N/N - mu|]`` for a family whose scenarios all have mean ``mu``.

    The declared ``mu`` is checked against a Monte Carlo mean of every
    scenario; a miss by more than 5 standard errors is an input error.
    """
    check_n = max(replications, 10_000)
    for j, sc in enumerate(family.scenarios):
        x = sc.sample(substream(seed, 1 << 21, j), check_n)
        m = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(check_n))
        if abs(m - mu) > max(5 * se, 1e-12 * max(1.0, abs(mu))):
            raise ValueError(f"scenario {sc.label} has mean {m:.6g} +/- {se:.2g}, not the declared {mu}")
    pols = list(policies) if policies is not None else constant_policies(len(family)) + (
        [alternating(len(family))] if len(family) > 1 else []
    )
    rows = []
    for N in N_schedule:
        f = TestFunction(lambda x: np.abs(np.mean(x, axis=-1) - mu), N, "|mean-mu|", 1.0 / math.sqrt(N))
        est = upper_expectation_mc(family, pols, f, N, replications, seed, threads)
        rows.append(ConvergenceRow(N, est.value, 0.0, abs(est.value), est.std_error, est.policy_achieving.label))
    return rows


@dataclass(frozen=True)
class UIRow:
    lam: float
    estimate: float  # max over scenarios of E[(|Y| - lam)^+]
    std_error: float
    scenario: str


@dataclass(frozen=True)
class UIReport:
    rows: tuple[UIRow, ...]
    vanishing: bool

    @property
    def flagged(self) -> bool:
        """True when the profile does not decay toward zero."""
        return not self.vanishing


def uniform_integrability_diagnostic(
    family: ScenarioFamily,
    lambda_schedule: Sequence[float],
    replications: int = 100_000,
    seed: int = 0,
    decay: float = 0.01,
) -> UIReport:
    """Tabulate ``max_theta E_theta[(|Y_1| - lam)^+]`` along an increasing ``lam`` schedule.

    Every scenario reuses one set of draws across the schedule. The profile
    counts as vanishing when the last entry is at most ``decay`` times the
    first (or exactly zero).
    """
    lams = [float(x) for x in lambda_schedule]
    if not lams or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] <= 0:
        raise ValueError("lambda_schedule must be positive and strictly increasing")
    draws = [np.abs(sc.sample(substream(seed, j), replications)) for j, sc in enumerate(family.scenarios)]
    rows = []
    for lam in lams:
        best = None
        for sc, a in zip(family.scenarios, draws):
            excess = np.maximum(a - lam, 0.0)
            m, se = _mean_and_se(excess)
            if best is None or m > best[0]:
                best = (m, se, sc.label)
        rows.append(UIRow(lam, *best))
    first, last = rows[0].estimate, rows[-1].estimate
    vanishing = last == 0.0 or (first > 0 and last <= decay * first)
    return UIReport(tuple(rows), vanishing)


def law_test_functions() -> Mapping[str, TestFunction]:
    """A finite dictionary of bounded Lipschitz test functions for convergence in law."""
    return {
        "clipped_linear": TestFunction(lambda x: np.clip(x[..., 0], -1.0, 1.0), 1, "clip(x,-1,1)", 1.0, True),
        "clipped_square": TestFunction(
            lambda x: np.clip(x[..., 0], -1.0, 1.0) ** 2, 1, "clip(x,-1,1)^2", 2.0, True
        ),
        "soft_step": TestFunction(lambda x: 1.0 / (1.0 + np.exp(-10.0 * (x[..., 0] - 0.5))), 1, "sigmoid(10(x-0.5))", 2.5, True),
        "bump": TestFunction(
            lambda x: np.maximum(0.0, 1.0 - np.abs(x[..., 0] - 0.5) / 0.25), 1, "bump(0.5,0.25)", 4.0, True
        ),
    }


def convergence_in_law(
    family: ScenarioFamily,
    N_schedule: Sequence[int],
    replications: int = 1000,
    seed: int = 0,
    policies: Sequence[Policy] | None = None,
    functions: Mapping[str, TestFunction] | None = None,
) -> dict[str, list[ConvergenceRow]]:
    """Run :func:`lln_convergence` for every function of the dictionary."""
    fns = law_test_functions() if functions is None else functions
    limit = known_limit_set(family) or limit_set_from_family(family, None, replications, seed)
    return {
        name: lln_convergence(family, phi, N_schedule, replications, seed, policies, limit)
        for name, phi in fns.items()
    }
