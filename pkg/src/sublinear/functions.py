"""Vectorized test functions of n real arguments.

A :class:`TestFunction` wraps a numpy callable mapping an array of shape
``(..., arity)`` to an array of shape ``(...)``. Everything downstream (box
maximization, Monte Carlo expectations, group means) evaluates functions in
batches, so callables must broadcast over leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A continuous function ``R^arity -> R`` with optional Lipschitz constant.

    ``lipschitz_constant`` is with respect to the Euclidean norm. When it is
    ``None`` the optimizer reports no certificate gap.
    """

    __test__ = False  # not a pytest class

    func: ArrayFn
    arity: int
    label: str = "f"
    lipschitz_constant: float | None = None
    bounded: bool = False

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"arity must be positive, got {self.arity}")
        if self.lipschitz_constant is not None and self.lipschitz_constant < 0:
            raise ValueError("lipschitz_constant must be nonnegative")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.arity:
            raise ValueError(
                f"{self.label}: expected trailing dimension {self.arity}, got shape {x.shape}"
            )
        out = np.asarray(self.func(x), dtype=float)
        return np.broadcast_to(out, x.shape[:-1])

    def scalar(self, values) -> np.ndarray:
        """Apply an arity-1 function elementwise to an array of any shape."""
        if self.arity != 1:
            raise ValueError(f"{self.label} has arity {self.arity}, not 1")
        values = np.asarray(values, dtype=float)
        return self(values[..., None])

    def __neg__(self) -> "TestFunction":
        fn = self.func
        return TestFunction(
            lambda x: -fn(x), self.arity, f"-({self.label})", self.lipschitz_constant, self.bounded
        )

    def __add__(self, other) -> "TestFunction":
        fn = self.func
        if isinstance(other, TestFunction):
            if other.arity != self.arity:
                raise ValueError("arity mismatch in sum")
            gn = other.func
            lip = _sum_lip(self.lipschitz_constant, other.lipschitz_constant)
            return TestFunction(
                lambda x: fn(x) + gn(x),
                self.arity,
                f"({self.label})+({other.label})",
                lip,
                self.bounded and other.bounded,
            )
        c = float(other)
        return TestFunction(
            lambda x: fn(x) + c, self.arity, f"({self.label})+{c!r}", self.lipschitz_constant, self.bounded
        )

    __radd__ = __add__

    def __sub__(self, other) -> "TestFunction":
        return self + (-other)

    def __rsub__(self, other) -> "TestFunction":
        return (-self) + other

    def __mul__(self, other) -> "TestFunction":
        lam = float(other)
        fn = self.func
        lip = None if self.lipschitz_constant is None else abs(lam) * self.lipschitz_constant
        return TestFunction(lambda x: lam * fn(x), self.arity, f"{lam!r}*({self.label})", lip, self.bounded)

    __rmul__ = __mul__

    def reflected(self) -> "TestFunction":
        """``x -> -f(-x)``, which swaps the roles of upper and lower mean."""
        fn = self.func
        return TestFunction(
            lambda x: -fn(-x), self.arity, f"refl({self.label})", self.lipschitz_constant, self.bounded
        )

    def spot_check_lipschitz(self, lower: float, upper: float, pairs: int = 1000, seed: int = 0) -> bool:
        """Check ``|f(x)-f(y)| <= L|x-y|`` on random pairs from ``[lower, upper]^arity``."""
        if self.lipschitz_constant is None:
            raise ValueError(f"{self.label} carries no Lipschitz constant")
        rng = np.random.default_rng(seed)
        x = rng.uniform(lower, upper, size=(pairs, self.arity))
        y = rng.uniform(lower, upper, size=(pairs, self.arity))
        lhs = np.abs(self(x) - self(y))
        rhs = self.lipschitz_constant * np.linalg.norm(x - y, axis=-1)
        return bool(np.all(lhs <= rhs * (1 + 1e-12) + 1e-12))


def _sum_lip(a, b):
    if a is None or b is None:
        return None
    return a + b


def max_of(n: int) -> TestFunction:
    return TestFunction(lambda x: np.max(x, axis=-1), n, "max", 1.0)


def min_of(n: int) -> TestFunction:
    return TestFunction(lambda x: np.min(x, axis=-1), n, "min", 1.0)


def mean_of(n: int) -> TestFunction:
    return TestFunction(lambda x: np.mean(x, axis=-1), n, "mean", 1.0 / math.sqrt(n))


def sum_of(n: int) -> TestFunction:
    return TestFunction(lambda x: np.sum(x, axis=-1), n, "sum", math.sqrt(n))


def median_of(n: int) -> TestFunction:
    return TestFunction(lambda x: np.median(x, axis=-1), n, "median", 1.0)


def coordinate(i: int, n: int) -> TestFunction:
    """The projection ``x -> x_i`` (1-based)."""
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} out of range for arity {n}")
    return TestFunction(lambda x: x[..., i - 1], n, f"x{i}", 1.0)


def identity() -> TestFunction:
    return TestFunction(lambda x: x[..., 0], 1, "x", 1.0)


def constant(c: float, n: int = 1) -> TestFunction:
    c = float(c)
    return TestFunction(lambda x: np.full(x.shape[:-1], c), n, repr(c), 0.0, True)


def difference(n: int = 2) -> TestFunction:
    """``x1 - x2``."""
    if n < 2:
        raise ValueError("difference needs arity >= 2")
    return TestFunction(lambda x: x[..., 0] - x[..., 1], n, "x1-x2", math.sqrt(2.0))


def of_mean(phi: TestFunction, n: int) -> TestFunction:
    """``phi`` applied to the sample mean: ``x -> phi(mean(x))``."""
    if phi.arity != 1:
        raise ValueError("phi must have arity 1")
    pf = phi.func
    lip = None if phi.lipschitz_constant is None else phi.lipschitz_constant / math.sqrt(n)
    return TestFunction(lambda x: pf(np.mean(x, axis=-1)[..., None]), n, f"{phi.label}(mean)", lip, phi.bounded)


BUILTINS: dict[str, Callable[[int], TestFunction]] = {
    "max": max_of,
    "min": min_of,
    "mean": mean_of,
    "median": median_of,
    "sum": sum_of,
}


def builtin(name: str, n: int) -> TestFunction:
    try:
        return BUILTINS[name](n)
    except KeyError:
        raise ValueError(f"unknown built-in function {name!r}") from None


def sinusoid_mixture(amplitudes, frequencies, phases, label: str = "sines") -> TestFunction:
    """``x -> sum_j a_j sin(w_j . x + b_j)`` with Lipschitz constant ``sum |a_j| |w_j|``."""
    a = np.asarray(amplitudes, dtype=float)
    w = np.atleast_2d(np.asarray(frequencies, dtype=float))
    b = np.asarray(phases, dtype=float)
    if not (a.shape[0] == w.shape[0] == b.shape[0]):
        raise ValueError("amplitudes, frequencies and phases must have matching length")
    lip = float(np.sum(np.abs(a) * np.linalg.norm(w, axis=1)))
    wt = w.T.copy()
    return TestFunction(lambda x: np.sin(x @ wt + b) @ a, w.shape[1], label, lip)


def random_sinusoid_mixture(n: int, rng: np.random.Generator, terms: int = 4, max_freq: float = 3.0) -> TestFunction:
    """Draw a random Lipschitz test function of ``n`` arguments."""
    a = rng.uniform(0.2, 1.0, size=terms)
    w = rng.uniform(-max_freq, max_freq, size=(terms, n))
    b = rng.uniform(0.0, 2 * np.pi, size=terms)
    return sinusoid_mixture(a, w, b, label=f"sines{n}")
