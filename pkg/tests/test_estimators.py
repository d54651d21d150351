import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear import estimators as est
from sublinear.functions import TestFunction, difference, identity, max_of, mean_of, median_of, min_of
from sublinear.maximal import MaximalDistribution, sample_path
from sublinear.policies import CyclicSchedule
from sublinear.scenarios import substream


def test_default_grid():
    g = est.default_grid()
    assert len(g) == 21
    assert (0.3, 0.3) in g and (-2.0, 2.5) in g
    assert all(a <= b for a, b in g)


class TestPointEstimators:
    def test_examples(self):
        assert est.max_estimator([1, 3, 2]) == 3
        assert est.min_estimator([1, 3, 2]) == 1
        assert est.max_estimator([4.5]) == est.min_estimator([4.5]) == 4.5
        assert est.estimate_interval([0.4, 0.6, 0.5]) == (0.4, 0.6)
        assert est.estimate_interval(est.Sample((2.0,) * 4)) == (2.0, 2.0)

    def test_empty_sample(self):
        with pytest.raises(ValueError):
            est.Sample(())
        with pytest.raises(ValueError):
            est.max_estimator([])

    def test_paths_from_maximal_sampler(self):
        M = MaximalDistribution(0.3, 0.7)
        pol = CyclicSchedule(tuple(np.linspace(0.3, 0.7, 11)))
        x = sample_path(M, pol, 1000, seed=3).values
        lo, hi = est.estimate_interval(x)
        assert 0.3 <= lo <= hi <= 0.7
        assert (lo, hi) == pytest.approx((0.3, 0.7), abs=1e-12)


class TestUnbiased:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_extremes(self, n):
        assert est.check_unbiased(max_of(n), n, "upper_mean").unbiased
        assert est.check_unbiased(min_of(n), n, "lower_mean").unbiased

    def test_x1_minus_x2_witness(self):
        v = est.check_unbiased(difference(2), 2, "upper_mean", grid=[(0.3, 0.7)])
        assert v.verdict == est.BIASED
        lo, hi, achieved = v.witness
        assert (lo, hi) == (0.3, 0.7)
        assert achieved == pytest.approx(0.4)

    def test_mean_and_median(self):
        for n in (1, 3, 4):
            for f in (mean_of(n), median_of(n)):
                assert est.check_unbiased(f, n, "upper").unbiased
                assert est.check_unbiased(f, n, "lower").unbiased

    def test_identity_is_unbiased_for_both(self):
        assert est.check_unbiased(identity(), 1, "upper_mean").unbiased
        assert est.check_unbiased(identity(), 1, "lower_mean").unbiased

    def test_biased_invariant(self):
        v = est.check_unbiased(2 * mean_of(3), 3)
        lo, hi, achieved = v.witness
        assert abs(achieved - hi) > v.tol

    def test_inconclusive_is_not_biased(self):
        f = TestFunction(lambda x: x[..., 0] + 0.1 * np.cos(50 * x[..., 0]), 1, "wiggle")
        v = est.check_unbiased(f, 1, grid=[(0.0, 1.0)], budget=4)
        assert v.verdict == est.INCONCLUSIVE
        assert v.witness is None
        assert est.check_unbiased(f, 1, grid=[(0.0, 1.0)]).verdict == est.BIASED

    def test_lipschitz_note(self):
        f = TestFunction(lambda x: x.max(axis=-1), 2, "max-nolip")
        v = est.check_unbiased(f, 2)
        assert v.unbiased and not v.lipschitz_known and v.notes

    def test_input_errors(self):
        with pytest.raises(ValueError, match="arity"):
            est.check_unbiased(max_of(2), 3)
        with pytest.raises(ValueError):
            est.check_unbiased(max_of(2), 2, grid=[(1.0, 0.0)])
        with pytest.raises(ValueError):
            est.check_unbiased(max_of(2), 2, target="median")

    def test_to_dict(self):
        d = est.check_unbiased(max_of(2), 2, grid=[(0, 1)]).to_dict()
        assert d["verdict"] == "unbiased" and d["witness"] is None


lams = st.floats(-3, 3).filter(lambda v: abs(v - 1) > 1e-3)


@settings(max_examples=10, deadline=None)
@given(lam=lams, n=st.integers(1, 4))
def test_scale_detection(lam, n):
    v = est.check_unbiased(lam * mean_of(n), n, grid=[(0.3, 0.7)])
    assert v.verdict == est.BIASED


@settings(max_examples=10, deadline=None)
@given(c=st.floats(-2, 2).filter(lambda v: abs(v) > 1e-3), n=st.integers(1, 4))
def test_shift_detection(c, n):
    assert est.check_unbiased(mean_of(n) + c, n).verdict == est.BIASED


@pytest.mark.parametrize("make", [max_of, min_of, mean_of, median_of, lambda n: 2 * mean_of(n)])
def test_verdict_symmetry(make):
    n = 3
    f = make(n)
    assert est.check_unbiased(f, n, "upper").unbiased == est.check_unbiased(f.reflected(), n, "lower").unbiased


class TestDominance:
    def test_unbiased_suite_is_dominated_by_max(self):
        pts = substream(8).uniform(0.3, 0.7, size=(10_000, 5))
        for f in (max_of(5), mean_of(5), median_of(5)):
            assert est.check_unbiased(f, 5).unbiased
            assert est.check_dominance(f, 5, pts).dominated
            assert est.check_dominance(f, 5, pts, target="lower").dominated

    def test_witness_for_excess(self):
        pts = substream(8).uniform(0.3, 0.7, size=(100, 2))
        rep = est.check_dominance(max_of(2) + 0.1, 2, pts)
        assert rep.violations == 100
        assert rep.max_gap == pytest.approx(0.1)
        assert rep.witness is not None
