import math

import numpy as np
import pytest
from scipy import integrate

from floodrisk.catbond import rates as R
from floodrisk.errors import DomainError

P = R.DEFAULT_RATES


def test_discount_at_zero_horizon():
    assert R.discount_factor_expectation(1.0, 1.0, P.rate) == pytest.approx(1.0)
    A, B = R.affine_coefficients(0.0, P.rate)
    assert A == 1.0 and B == 0.0


def test_shibor_at_zero_horizon():
    for form in ("exact", "printed"):
        v = R.discounted_shibor_expectation(0.0, 0.0, P, form=form)
        assert v == pytest.approx(math.expm1(P.reference.x0), abs=1e-15)


def test_horizon_before_t_rejected():
    with pytest.raises(DomainError):
        R.discount_factor_expectation(2.0, 1.0, P.rate)


def test_zero_volatility_matches_mean_path():
    f = R.VasicekFactor(a=0.7, b=0.05, sigma=0.0, x0=0.01)
    s = 3.0
    mean_path = lambda v: f.b + (f.x0 - f.b) * math.exp(-f.a * v)
    integral, _ = integrate.quad(mean_path, 0.0, s, epsabs=1e-14)
    assert R.discount_factor_expectation(0.0, s, f) == pytest.approx(math.exp(-integral), abs=1e-8)


def test_printed_form_rejects_equal_speeds():
    f = R.VasicekFactor(0.5, 0.03, 0.01, 0.02)
    pair = R.VasicekPair(f, R.VasicekFactor(0.5, 0.02, 0.02, 0.02), 0.3)
    with pytest.raises(DomainError):
        R.discounted_shibor_expectation(0.0, 1.0, pair, form="printed")
    # the exact form has no such singularity
    assert math.isfinite(R.discounted_shibor_expectation(0.0, 1.0, pair))


def test_printed_form_agrees_at_short_horizons():
    e = R.discounted_shibor_expectation(0.0, 0.01, P)
    p = R.discounted_shibor_expectation(0.0, 0.01, P, form="printed")
    assert p == pytest.approx(e, rel=1e-3)


def test_parameter_validation():
    with pytest.raises(DomainError):
        R.VasicekFactor(0.0, 0.01, 0.01, 0.01)
    with pytest.raises(DomainError):
        R.VasicekPair(P.rate, P.reference, 1.0)


@pytest.fixture(scope="module")
def euler():
    return R.euler_expectations(P, [0.25, 1.0, 3.0], n_paths=40_000, seed=5)


def test_closed_forms_match_euler(euler):
    for j, s in enumerate((0.25, 1.0, 3.0)):
        d = R.discount_factor_expectation(0.0, s, P.rate)
        i = R.discounted_shibor_expectation(0.0, s, P)
        assert abs(d / euler["discount"][j] - 1) < 5e-3
        assert abs(i / euler["shibor"][j] - 1) < 5e-3
        # and within a few Monte Carlo standard errors
        assert abs(i - euler["shibor"][j]) < 4 * euler["shibor_se"][j] + 1e-4 * abs(i)


def test_rho_ordering_matches_monte_carlo():
    grid = [-0.5, 0.0, 0.5, 0.89]
    closed, mc = [], []
    for rho in grid:
        pair = R.VasicekPair(P.rate, P.reference, rho)
        closed.append(R.discounted_shibor_expectation(0.0, 3.0, pair))
        mc.append(R.euler_expectations(pair, [3.0], n_paths=20_000, seed=9)["shibor"][0])
    assert np.all(np.diff(closed) < 0)
    assert np.argsort(closed).tolist() == np.argsort(mc).tolist()


def test_coupon_factor_is_affine_in_spread():
    a = R.coupon_factor(1.0, P, 0.0)
    b = R.coupon_factor(1.0, P, 0.1)
    assert b - a == pytest.approx(0.1 * R.discount_factor_expectation(0.0, 1.0, P.rate))


def test_euler_horizon_grid_check():
    with pytest.raises(DomainError):
        R.euler_expectations(P, [0.3], n_paths=10)
