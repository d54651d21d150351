"""Finite families of probability laws and the seeded random streams that feed them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for ``(seed, *key)``.

    Streams are split with ``SeedSequence(seed, spawn_key=key)``; the Monte
    Carlo engines key them by ``(policy, replication)`` so that results do not
    depend on evaluation order or worker count.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


@dataclass(frozen=True, eq=False)
class Scenario:
    """One probability law: a label, a sampler and (optionally) its exact moments.

    ``expect`` maps a vectorized scalar function to its exact expectation under
    this law; it is used for reference values and is optional.
    """

    label: str
    sampler: Sampler
    mean: float | None = None
    expect: Callable[[Callable[[np.ndarray], np.ndarray]], float] | None = None

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(self.sampler(rng, size), dtype=float).reshape(size)


@dataclass(frozen=True, eq=False)
class ScenarioFamily:
    """The uncertainty set ``{P_theta}`` as an ordered tuple of scenarios (d = 1)."""

    scenarios: tuple[Scenario, ...]
    dimension: int = field(default=1)

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.scenarios:
            raise ValueError("a scenario family needs at least one scenario")
        labels = [s.label for s in self.scenarios]
        if len(set(labels)) != len(labels):
            raise ValueError(f"scenario labels must be unique: {labels}")
        if self.dimension != 1:
            raise ValueError("only one-dimensional families are supported")

    def __len__(self) -> int:
        return len(self.scenarios)

    def __getitem__(self, i: int) -> Scenario:
        return self.scenarios[i]

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.scenarios]

    @property
    def means(self) -> list[float | None]:
        return [s.mean for s in self.scenarios]

    def exact_upper(self, phi: Callable[[np.ndarray], np.ndarray]) -> float | None:
        """``max_theta E_theta[phi(Y)]`` when every scenario knows its expectations."""
        if any(s.expect is None for s in self.scenarios):
            return None
        return max(s.expect(phi) for s in self.scenarios)


def dirac(c: float) -> Scenario:
    c = float(c)
    return Scenario(
        f"dirac({c:g})",
        lambda rng, size: np.full(size, c),
        mean=c,
        expect=lambda phi: float(phi(np.array([c]))[0]),
    )


def bernoulli(p: float) -> Scenario:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bernoulli parameter must lie in [0, 1], got {p}")
    p = float(p)

    def expect(phi):
        v = phi(np.array([0.0, 1.0]))
        return float((1 - p) * v[0] + p * v[1])

    return Scenario(
        f"bernoulli({p:g})",
        lambda rng, size: (rng.random(size) < p).astype(float),
        mean=p,
        expect=expect,
    )


def normal(mu: float, sigma: float) -> Scenario:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    mu, sigma = float(mu), float(sigma)
    nodes, weights = np.polynomial.hermite_e.hermegauss(80)
    weights = weights / weights.sum()

    return Scenario(
        f"normal({mu:g},{sigma:g})",
        lambda rng, size: rng.normal(mu, sigma, size),
        mean=mu,
        expect=lambda phi: float(np.dot(weights, phi(mu + sigma * nodes))),
    )


def uniform(a: float, b: float) -> Scenario:
    if a > b:
        raise ValueError("uniform needs a <= b")
    a, b = float(a), float(b)
    nodes, weights = np.polynomial.legendre.leggauss(80)

    return Scenario(
        f"uniform({a:g},{b:g})",
        lambda rng, size: rng.uniform(a, b, size),
        mean=(a + b) / 2,
        expect=lambda phi: float(np.dot(weights, phi((a + b) / 2 + (b - a) / 2 * nodes)) / 2),
    )


def pareto(alpha: float, scale: float = 1.0) -> Scenario:
    """Classical Pareto law on ``[scale, inf)`` with tail index ``alpha``."""
    if alpha <= 0 or scale <= 0:
        raise ValueError("pareto needs alpha > 0 and scale > 0")
    alpha, scale = float(alpha), float(scale)
    mean = alpha * scale / (alpha - 1) if alpha > 1 else math.inf
    return Scenario(
        f"pareto({alpha:g},{scale:g})",
        lambda rng, size: scale * (1.0 + rng.pareto(alpha, size)),
        mean=mean,
    )


def family(*scenarios: Scenario) -> ScenarioFamily:
    return ScenarioFamily(tuple(scenarios))


def dirac_family(values: Sequence[float]) -> ScenarioFamily:
    return ScenarioFamily(tuple(dirac(v) for v in values))


def dirac_grid(lower: float, upper: float, points: int) -> ScenarioFamily:
    """Point masses on an equally spaced grid of ``[lower, upper]``."""
    if points < 1:
        raise ValueError("points must be positive")
    values = np.linspace(lower, upper, points) if points > 1 else np.array([lower])
    return dirac_family(values)


_BUILDERS = {
    "dirac": (dirac, 1),
    "bernoulli": (bernoulli, 1),
    "normal": (normal, 2),
    "uniform": (uniform, 2),
    "pareto": (pareto, (1, 2)),
}


def parse_scenarios(spec: str) -> list[Scenario]:
    """Parse ``"kind:a,b"``. ``"diracgrid:lo,hi,points"`` expands to several scenarios."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    try:
        args = [float(t) for t in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise ValueError(f"bad numeric arguments in scenario spec {spec!r}") from None
    if kind == "diracgrid":
        if len(args) != 3:
            raise ValueError("diracgrid needs lo,hi,points")
        return list(dirac_grid(args[0], args[1], int(args[2])).scenarios)
    if kind not in _BUILDERS:
        raise ValueError(f"unknown scenario kind {kind!r} in {spec!r}")
    fn, nargs = _BUILDERS[kind]
    allowed = nargs if isinstance(nargs, tuple) else (nargs,)
    if len(args) not in allowed:
        raise ValueError(f"{kind} takes {' or '.join(map(str, allowed))} argument(s), got {len(args)}")
    return [fn(*args)]


def parse_family(specs: Sequence[str]) -> ScenarioFamily:
    scenarios: list[Scenario] = []
    for s in specs:
        scenarios.extend(parse_scenarios(s))
    return ScenarioFamily(tuple(scenarios))
