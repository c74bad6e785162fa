import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import multivariate_normal

from ar2max.errors import InvalidParameter, ModeMismatch, NonStationary, SignConditionViolated
from ar2max.model import (EmpiricalJointCdf, bivariate_normal_cdf, clipped_initial, gaussian_innovation,
                          initial_law, logistic_innovation, logistic_scale_for_sd, make_innovation,
                          stationary_moments, validate_params)


def test_param_validation():
    assert validate_params(0.5, 0.3).r1 == 0.5
    with pytest.raises(SignConditionViolated):
        validate_params(-0.5, 0.3)
    with pytest.raises(SignConditionViolated):
        validate_params(0.3, -0.5)
    with pytest.raises(NonStationary):
        validate_params(0.8, 0.3)
    with pytest.raises(InvalidParameter):
        validate_params(0.5, 0.3, 0.0)
    with pytest.raises(InvalidParameter):
        validate_params(float("nan"), 0.3)


def test_yule_walker_reference():
    var_x, rho1, rho2 = stationary_moments(validate_params(0.5, 0.3))
    assert var_x == pytest.approx(2.24359, abs=1e-5)
    assert rho1 == pytest.approx(5 / 7)
    assert rho2 == pytest.approx(0.3 + 0.5 * 5 / 7)


@pytest.mark.parametrize("inn", [gaussian_innovation(1.3), logistic_innovation(0.7)])
def test_density_derivatives(inn):
    t = np.linspace(-6, 6, 41)
    h = 1e-5
    assert np.allclose((inn.cdf(t + h) - inn.cdf(t - h)) / (2 * h), inn.pdf(t), atol=1e-8)
    assert np.allclose((inn.pdf(t + h) - inn.pdf(t - h)) / (2 * h), inn.pdf_deriv(t), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(0.2, 3.0))
def test_gaussian_pdf_deriv_property(t, s):
    inn = gaussian_innovation(s)
    assert inn.pdf_deriv(t) == pytest.approx(-t / s ** 2 * inn.pdf(t), abs=1e-14)


def test_logistic_unit_variance():
    inn = make_innovation("logistic", 1.0)
    assert inn.variance == pytest.approx(1.0)
    assert inn.scale == pytest.approx(logistic_scale_for_sd(1.0))
    with pytest.raises(InvalidParameter):
        make_innovation("cauchy", 1.0)


def test_tail_quantile_roundtrip():
    for inn in (gaussian_innovation(2.0), logistic_innovation(0.5)):
        for p in (1e-8, 0.1, 0.5, 0.9):
            assert inn.cdf(inn.tail_quantile(p)) == pytest.approx(p, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-0.9, 0.9), st.floats(0.5, 3.0))
def test_bivariate_normal_matches_scipy(a, b, rho, var):
    ref = multivariate_normal(mean=[0, 0], cov=[[var, rho * var], [rho * var, var]]).cdf([a, b])
    assert bivariate_normal_cdf(a, b, var, rho) == pytest.approx(ref, abs=2e-6)


def test_bivariate_normal_limits():
    assert bivariate_normal_cdf(np.inf, np.inf, 2.0, 0.4) == pytest.approx(1.0)
    assert bivariate_normal_cdf(-np.inf, 1.0, 2.0, 0.4) == 0.0
    sd = math.sqrt(2.0)
    assert bivariate_normal_cdf(1.0, np.inf, 2.0, 0.4) == pytest.approx(0.5 * math.erfc(-1 / sd / math.sqrt(2)))


def test_initial_law_monotone_and_marginal():
    p = validate_params(0.5, 0.3)
    law = initial_law(p, gaussian_innovation(1.0))
    y = np.linspace(-5, 5, 21)
    grid = law(y[:, None], y[None, :])
    assert np.all(np.diff(grid, axis=0) >= -1e-12) and np.all(np.diff(grid, axis=1) >= -1e-12)
    assert law.marginal(3.0) == pytest.approx(0.5 * math.erfc(-3 / math.sqrt(2 * 2.24359)), abs=1e-6)


def test_mode_mismatch():
    p = validate_params(0.5, 0.3)
    with pytest.raises(ModeMismatch):
        initial_law(p, logistic_innovation(0.5), "gaussian-stationary")


def test_empirical_cdf_matches_counts():
    rng = np.random.default_rng(3)
    s = rng.normal(size=(5000, 2))
    cdf = EmpiricalJointCdf(s)
    for a, b in [(0.0, 0.0), (1.0, -0.5), (-3, 2), (10, 10)]:
        assert cdf(a, b) == pytest.approx(np.mean((s[:, 0] <= a) & (s[:, 1] <= b)))


def test_clipped_initial():
    p = validate_params(0.5, 0.3)
    law = initial_law(p, gaussian_innovation(1.0))
    g1, g2 = clipped_initial(law, 2.0)
    assert g1(5.0, 1.0) == pytest.approx(law(2.0, 1.0))
    assert g2(5.0, 7.0) == pytest.approx(law(2.0, 2.0))
