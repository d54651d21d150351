import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear.expectation import (
    duality_check,
    lower_expectation_mc,
    simulate_paths,
    upper_expectation_mc,
)
from sublinear.functions import TestFunction, constant, coordinate, mean_of, of_mean
from sublinear.policies import Constant, CyclicSchedule, HistoryFeedback, RandomMixture, constant_policies
from sublinear.scenarios import bernoulli, dirac, family, normal

REPS = 2000


def test_dirac_pair_upper(dirac_pair):
    est = upper_expectation_mc(dirac_pair, constant_policies(2), coordinate(1, 1), 1, 100)
    assert est.value == 1.0
    assert est.std_error == 0.0
    assert est.policy_achieving == Constant(1)


def test_dirac_pair_lower(dirac_pair):
    est = lower_expectation_mc(dirac_pair, constant_policies(2), coordinate(1, 1), 1, 100)
    assert est.value == 0.0
    assert est.policy_achieving == Constant(0)


def test_singleton_is_exact():
    fam = family(dirac(0.25))
    f = TestFunction(lambda x: np.sin(x).sum(axis=-1), 4, "sinsum")
    up = upper_expectation_mc(fam, [Constant(0)], f, 4, 50)
    lo = lower_expectation_mc(fam, [Constant(0)], f, 4, 50)
    assert up.value == pytest.approx(4 * math.sin(0.25), abs=1e-15)
    assert up.std_error == 0.0
    assert lo.value == up.value


def test_bernoulli_pair_mean(bernoulli_pair):
    # the binomial mean of each constant policy is its p
    up = upper_expectation_mc(bernoulli_pair, constant_policies(2), mean_of(100), 100, 10_000, seed=5)
    assert abs(up.value - 0.7) < 3 * up.std_error
    lo = lower_expectation_mc(bernoulli_pair, constant_policies(2), mean_of(100), 100, 10_000, seed=5)
    assert abs(lo.value - 0.3) < 3 * lo.std_error
    binom_se = math.sqrt(0.7 * 0.3 / 100 / 10_000)
    assert up.std_error == pytest.approx(binom_se, rel=0.05)


def test_duality_report(dirac_pair, bernoulli_pair):
    rep = duality_check(dirac_pair, constant_policies(2), coordinate(1, 1), 1, 10)
    assert (rep.lower.value, rep.upper.value, rep.consistent) == (0.0, 1.0, True)
    phi = TestFunction(lambda x: (x[..., 0] - 0.5) ** 2, 1, "sq")
    rep = duality_check(bernoulli_pair, constant_policies(2), of_mean(phi, 20), 20, REPS, seed=2)
    assert rep.consistent and rep.lower.value <= rep.upper.value


def test_constant_preserving(bernoulli_pair):
    est = upper_expectation_mc(bernoulli_pair, constant_policies(2), constant(3.5, 5), 5, 100)
    assert est.value == 3.5 and est.std_error == 0.0


def test_input_errors(bernoulli_pair):
    with pytest.raises(ValueError, match="arity"):
        upper_expectation_mc(bernoulli_pair, constant_policies(2), mean_of(3), 4, 10)
    with pytest.raises(ValueError, match="policy"):
        upper_expectation_mc(bernoulli_pair, [], mean_of(3), 3, 10)
    with pytest.raises(ValueError, match="invalid scenario index"):
        upper_expectation_mc(bernoulli_pair, [Constant(2)], mean_of(3), 3, 10)


def test_deterministic_and_thread_invariant(bernoulli_pair):
    pols = constant_policies(2) + [CyclicSchedule((0, 1)), RandomMixture((1, 1))]
    f = mean_of(30)
    a = upper_expectation_mc(bernoulli_pair, pols, f, 30, 500, seed=9)
    b = upper_expectation_mc(bernoulli_pair, pols, f, 30, 500, seed=9, threads=3)
    assert a == b


def test_adaptive_policy_paths():
    fam = family(dirac(0.0), dirac(1.0))
    # pick 1 until the running sum reaches 2, then 0
    pol = HistoryFeedback(lambda h: (h.running_sum < 2).astype(int), "upto2")
    (paths,) = list(simulate_paths(fam, pol, 5, 3, seed=0))
    assert paths.tolist() == [[1, 1, 0, 0, 0]] * 3


def test_enlarging_policy_set_never_lowers(bernoulli_pair):
    f = mean_of(10)
    base = constant_policies(1)
    small = upper_expectation_mc(bernoulli_pair, base, f, 10, 300, seed=4)
    big = upper_expectation_mc(bernoulli_pair, base + [Constant(1), CyclicSchedule((1, 0))], f, 10, 300, seed=4)
    assert big.value >= small.value


shifts = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=15, deadline=None)
@given(c=shifts, lam=st.floats(0, 4))
def test_translation_and_homogeneity(c, lam):
    fam = family(bernoulli(0.3), normal(0.5, 1.0))
    pols = constant_policies(2) + [CyclicSchedule((0, 1))]
    f = mean_of(6)
    base = upper_expectation_mc(fam, pols, f, 6, 200, seed=11)
    shifted = upper_expectation_mc(fam, pols, f + c, 6, 200, seed=11)
    scaled = upper_expectation_mc(fam, pols, lam * f, 6, 200, seed=11)
    # exact up to float rounding of the per-path arithmetic
    assert shifted.value == pytest.approx(base.value + c, abs=1e-12)
    assert scaled.value == pytest.approx(lam * base.value, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(0, 3))
def test_monotonicity(c):
    fam = family(bernoulli(0.3), normal(0.5, 1.0))
    pols = constant_policies(2)
    f = mean_of(5)
    g = TestFunction(lambda x: np.mean(x, axis=-1) + c * np.abs(x[..., 0]), 5, "g")
    assert upper_expectation_mc(fam, pols, f, 5, 200, seed=1).value <= upper_expectation_mc(fam, pols, g, 5, 200, seed=1).value


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_lower_is_negated_upper(seed):
    fam = family(bernoulli(0.3), bernoulli(0.7))
    f = mean_of(4)
    lo = lower_expectation_mc(fam, constant_policies(2), f, 4, 100, seed)
    up = upper_expectation_mc(fam, constant_policies(2), -f, 4, 100, seed)
    assert lo.value == -up.value
