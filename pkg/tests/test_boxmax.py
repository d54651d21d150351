import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear.boxmax import (
    Box,
    box_maximize,
    grid_points_per_axis,
    nested_maximize,
    sublinear_eval_maximal,
)
from sublinear.functions import (
    TestFunction,
    difference,
    max_of,
    mean_of,
    median_of,
    min_of,
    random_sinusoid_mixture,
    sinusoid_mixture,
)
from sublinear.scenarios import substream

TOL = 1e-6


def sum2():
    return TestFunction(lambda x: x.sum(axis=-1), 2, "x1+x2", math.sqrt(2))


def test_box_validation():
    with pytest.raises(ValueError):
        Box(1.0, 0.0, 2)
    with pytest.raises(ValueError):
        Box(0.0, 1.0, 0)
    assert Box(0.5, 0.5, 3).degenerate


def test_grid_points_per_axis():
    assert grid_points_per_axis(100_000, 1) == 100_000
    assert grid_points_per_axis(100_000, 2) == 316
    assert grid_points_per_axis(50_000, 5) == 8
    assert grid_points_per_axis(3, 4) == 2


def test_linear_max_at_corner():
    res = box_maximize(sum2(), Box(0, 1, 2))
    assert res.value == 2.0
    assert res.argmax.tolist() == [1.0, 1.0]
    assert res.converged


def test_interior_max():
    f = TestFunction(lambda x: -(x**2).sum(axis=-1), 2, "-|x|^2", 2 * math.sqrt(2))
    res = box_maximize(f, Box(-1, 1, 2))
    assert abs(res.value) <= TOL
    assert np.allclose(res.argmax, 0.0, atol=1e-3)


def test_against_dense_grid():
    f = TestFunction(lambda x: np.sin(3 * x[..., 0]) + np.cos(2 * x[..., 1]), 2, "sc", math.sqrt(13))
    g = np.linspace(0, 2, 1000)
    X, Y = np.meshgrid(g, g, indexing="ij")
    dense = float(f(np.stack([X, Y], axis=-1)).max())
    res = box_maximize(f, Box(0, 2, 2))
    assert res.value >= dense - TOL
    assert res.value == pytest.approx(2.0, abs=TOL)
    assert res.certificate_gap is not None and res.value + res.certificate_gap >= 2.0


def test_result_invariants():
    rng = substream(21)
    for n in (1, 2, 3):
        f = random_sinusoid_mixture(n, rng)
        box = Box(-0.5, 1.0, n)
        res = box_maximize(f, box)
        assert box.contains(res.argmax)
        assert float(f(res.argmax[None, :])[0]) == res.value
        assert res.evaluations <= 100_000


def test_degenerate_box_single_evaluation():
    res = box_maximize(mean_of(3), Box(0.4, 0.4, 3))
    assert res.value == pytest.approx(0.4)
    assert res.evaluations == 1
    assert res.certificate_gap == 0.0


def test_budget_exhaustion_warns():
    f = sinusoid_mixture([1.0], [[7.0, -5.0, 3.0]], [0.3])
    res = box_maximize(f, Box(0, 1, 3), budget=40)
    assert res.warning is not None
    assert not res.converged


def test_dimension_guard():
    with pytest.raises(ValueError, match="allow_high_dim"):
        box_maximize(max_of(11), Box(0, 1, 11))
    res = box_maximize(max_of(11), Box(0, 1, 11), budget=5000, allow_high_dim=True)
    assert res.value == 1.0


def test_arity_mismatch():
    with pytest.raises(ValueError, match="arity"):
        box_maximize(max_of(2), Box(0, 1, 3))


def test_lexicographic_tie_break():
    # constant function: every grid point ties
    f = TestFunction(lambda x: np.zeros(x.shape[:-1]), 2, "zero", 0.0)
    res = box_maximize(f, Box(0, 1, 2))
    assert res.argmax.tolist() == [0.0, 0.0]


class TestNested:
    def test_mean(self):
        assert nested_maximize(mean_of(3), (0, 1), 3).value == pytest.approx(1.0, abs=TOL)

    def test_difference(self):
        assert nested_maximize(difference(2), (0, 1), 2).value == pytest.approx(1.0, abs=TOL)

    def test_agrees_with_box(self):
        rng = substream(2024)
        f = random_sinusoid_mixture(3, rng)
        a = nested_maximize(f, (0.3, 0.7), 3).value
        b = box_maximize(f, Box(0.3, 0.7, 3)).value
        assert abs(a - b) <= 2 * TOL


class TestSublinearEval:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_max_is_upper_mean(self, n):
        assert sublinear_eval_maximal(max_of(n), 0.3, 0.7, n) == pytest.approx(0.7, abs=TOL)

    def test_difference(self):
        assert sublinear_eval_maximal(difference(2), 0.3, 0.7, 2) == pytest.approx(0.4, abs=TOL)

    def test_scaled_mean(self):
        assert sublinear_eval_maximal(2 * mean_of(4), 0.3, 0.7, 4) == pytest.approx(1.4, abs=TOL)


suite = [max_of, min_of, mean_of, median_of]
intervals = st.tuples(st.floats(-3, 3), st.floats(0, 3)).map(lambda t: (t[0], t[0] + t[1]))


@settings(max_examples=25, deadline=None)
@given(iv=intervals, i=st.integers(0, 3), j=st.integers(0, 3), n=st.integers(2, 4))
def test_subadditivity(iv, i, j, n):
    lo, hi = iv
    f, g = suite[i](n), suite[j](n)
    lhs = sublinear_eval_maximal(f + g, lo, hi, n)
    rhs = sublinear_eval_maximal(f, lo, hi, n) + sublinear_eval_maximal(g, lo, hi, n)
    assert lhs <= rhs + 3 * TOL


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 3))
def test_monotone_in_box(seed, n):
    f = random_sinusoid_mixture(n, substream(seed))
    chain = [(0.45, 0.55), (0.4, 0.6), (0.3, 0.7), (0.0, 1.0)]
    values = [sublinear_eval_maximal(f, lo, hi, n) for lo, hi in chain]
    assert all(b >= a - TOL for a, b in zip(values, values[1:]))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 3))
def test_diagonal_lower_bound(seed, n):
    f = random_sinusoid_mixture(n, substream(seed))
    c = np.linspace(0.3, 0.7, 2001)
    diag = float(f(np.repeat(c[:, None], n, axis=1)).max())
    assert sublinear_eval_maximal(f, 0.3, 0.7, n) >= diag - TOL


def test_symmetric_argmax_permutations():
    f = TestFunction(lambda x: -np.abs(np.sort(x, axis=-1) - np.array([0.35, 0.5, 0.65])).sum(axis=-1), 3, "sym", 3.0)
    res = box_maximize(f, Box(0.3, 0.7, 3))
    for perm in itertools.permutations(range(3)):
        assert float(f(res.argmax[list(perm)])) == pytest.approx(res.value, abs=1e-15)
