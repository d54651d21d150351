"""Estimation under sublinear expectation.

Exact sublinear expectations of functions of maximally distributed samples,
unbiasedness checks for upper/lower mean estimators, grouped envelope
estimators and a Monte Carlo harness for the law of large numbers under
mean uncertainty.
"""
from .boxmax import Box, OptResult, box_maximize, nested_maximize, sublinear_eval_maximal
from .estimators import (
    EstimatorVerdict,
    Sample,
    check_dominance,
    check_unbiased,
    default_grid,
    estimate_interval,
    max_estimator,
    min_estimator,
)
from .expectation import duality_check, lower_expectation_mc, upper_expectation_mc
from .expr import ExpressionError, parse_function
from .functions import TestFunction
from .grouped import block_envelope, envelope_estimator, group_mean, inverse_trn, trn
from .lln import (
    lln_convergence,
    strong_convergence_degenerate,
    uniform_integrability_diagnostic,
)
from .maximal import MaximalDistribution, dist_op, pushforward_params, sample_path
from .scenarios import Scenario, ScenarioFamily, parse_family

__version__ = "0.1.0"
