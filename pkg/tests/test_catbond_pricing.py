import math

import numpy as np
import pytest

from floodrisk.catbond import (
    DEFAULT_RATES,
    DEFAULT_TRIGGER,
    BondTerms,
    Scenarios,
    calibrate_kappa,
    closed_form_coupon_bond,
    coupon_factor,
    discount_factor_expectation,
    distorted_quantile,
    par_spread,
    price_bond,
    sensitivity_sweep,
    trigger_increment,
)
from floodrisk.catbond.pricing import _block_values
from floodrisk.errors import BracketError, DomainError

TERMS = BondTerms()
N = 20_000


@pytest.fixture(scope="module")
def scen():
    return Scenarios(seed=42, n_paths=N, block_size=5_000)


def reference_values(block, terms, trigger, kappa):
    """Price each path with a plain loop over its events."""
    arr, U = block.ensure(trigger.rate * terms.maturity)
    d, n_c, K, Tm = terms.coupon_interval, terms.n_coupons, terms.face, terms.maturity
    out = np.empty(block.size)
    for p in range(block.size):
        times = arr[p] / trigger.rate
        keep = times <= Tm
        times = times[keep]
        x = distorted_quantile(U[p][keep], trigger.severity, kappa)
        inc = np.atleast_1d(trigger_increment(x, trigger))

        def y_at(t):
            return inc[times <= t].sum()

        cum = np.cumsum(inc)
        hit = np.nonzero(cum >= 1 - 1e-12)[0]
        tau = times[hit[0]] if hit.size else math.inf
        v = 0.0
        for s in range(1, n_c + 1):
            if s * d > tau:
                break
            v += K * d * coupon_factor(s * d, DEFAULT_RATES, terms.spread) * max(1 - y_at((s - 1) * d), 0)
        if math.isinf(tau):
            v += K * discount_factor_expectation(0, Tm, DEFAULT_RATES.rate) * max(1 - y_at(Tm), 0)
        else:
            last = math.floor(tau / d)
            v += K * d * (tau - last * d) * max(1 - y_at(last * d), 0) * coupon_factor(
                tau, DEFAULT_RATES, terms.spread
            )
        out[p] = v
    return out


def test_block_matches_reference_loop():
    sc = Scenarios(seed=3, n_paths=300, block_size=300)
    block = sc.blocks[0]
    for kappa in (0.0, 1.5):
        trig = DEFAULT_TRIGGER.with_(rate=6.0)  # more wipe-outs to exercise the accrued term
        dates = TERMS.coupon_interval * np.arange(1, TERMS.n_coupons + 1)
        coupons = coupon_factor(dates, DEFAULT_RATES, TERMS.spread)
        p_T = discount_factor_expectation(0, TERMS.maturity, DEFAULT_RATES.rate)
        v, wiped = _block_values(block, TERMS, trig, DEFAULT_RATES, kappa, coupons, p_T, "exact")
        ref = reference_values(block, TERMS, trig, kappa)
        assert wiped.any()
        assert np.max(np.abs(v - ref)) < 1e-9


def test_no_trigger_equals_closed_form(scen):
    cf = closed_form_coupon_bond(TERMS)
    r0 = price_bond(TERMS, DEFAULT_TRIGGER.with_(rate=0.0), kappa=0.42, scenarios=scen)
    assert abs(r0.price - cf) < 1e-9 and r0.se < 1e-9
    rz = price_bond(TERMS, DEFAULT_TRIGGER.with_(fractions=(0, 0, 0, 0)), kappa=0.42, scenarios=scen)
    assert abs(rz.price - cf) < 1e-9


def test_price_decreasing_in_kappa(scen):
    prices = [price_bond(TERMS, kappa=k, scenarios=scen).price for k in np.arange(0, 1.51, 0.25)]
    assert np.all(np.diff(prices) < 0)


def test_price_nonincreasing_in_rate_and_fractions(scen):
    p = [price_bond(TERMS, DEFAULT_TRIGGER.with_(rate=r), kappa=0.42, scenarios=scen).price
         for r in (1.0, 2.0, 2.55, 4.0)]
    assert np.all(np.diff(p) <= 1e-9)
    base = np.array(DEFAULT_TRIGGER.fractions)
    q = [price_bond(TERMS, DEFAULT_TRIGGER.with_(fractions=tuple(base * f)), kappa=0.42,
                    scenarios=scen).price for f in (0.5, 1.0, 2.0)]
    assert np.all(np.diff(q) <= 1e-9)


def test_shape_sweep_direction(scen):
    rows = sensitivity_sweep("shape", [-0.3, -0.2, -0.1], TERMS, kappa=0.42, scenarios=scen)
    assert all(r.flag == "" for r in rows)
    assert rows[0].price < rows[1].price < rows[2].price
    for r in rows:
        assert r.scale / r.value == pytest.approx(-1432.311)


def test_shape_sweep_flags_invalid_points(scen):
    rows = sensitivity_sweep("shape", [0.1, -0.1], TERMS, kappa=0.42, scenarios=scen)
    assert rows[0].flag and math.isnan(rows[0].price)
    assert rows[1].flag == ""


def test_singleton_sweep_equals_price(scen):
    (row,) = sensitivity_sweep("kappa", [0.3], TERMS, scenarios=scen)
    assert row.price == price_bond(TERMS, kappa=0.3, scenarios=scen).price


def test_sweep_rejects_unknown_parameter(scen):
    with pytest.raises(DomainError):
        sensitivity_sweep("rate", [1.0], scenarios=scen)


def test_worker_and_block_invariance():
    a = price_bond(TERMS, kappa=0.42, n_paths=12_000, seed=9, block_size=3_000, workers=1)
    b = price_bond(TERMS, kappa=0.42, n_paths=12_000, seed=9, block_size=3_000, workers=4)
    assert a == b


def test_se_scaling():
    small = price_bond(TERMS, kappa=0.42, n_paths=10_000, seed=1)
    large = price_bond(TERMS, kappa=0.42, n_paths=100_000, seed=1)
    ratio = small.se / large.se
    assert math.sqrt(10) / 1.3 < ratio < math.sqrt(10) * 1.3


def test_calibration_self_consistency(scen):
    target = price_bond(TERMS, kappa=0.3, scenarios=scen).price
    res = calibrate_kappa(TERMS, target=target, bracket=(0.0, 1.5), scenarios=scen)
    assert res.converged
    assert res.kappa == pytest.approx(0.3, abs=0.02)
    again = price_bond(TERMS, kappa=res.kappa, scenarios=scen).price
    assert abs(again - target) < 0.5


def test_calibration_at_price_zero(scen):
    p0 = price_bond(TERMS, kappa=0.0, scenarios=scen).price
    res = calibrate_kappa(TERMS, target=p0 - 0.1, bracket=(0.0, 1.5), scenarios=scen)
    assert res.kappa == pytest.approx(0.0, abs=0.01)


def test_calibration_bracket_error(scen):
    with pytest.raises(BracketError):
        calibrate_kappa(TERMS, target=5000.0, scenarios=scen)


def test_par_spread_prices_at_par(scen):
    r = par_spread(TERMS, kappa=0.42, scenarios=scen)
    p = price_bond(TERMS.with_(spread=r), kappa=0.42, scenarios=scen).price
    assert p == pytest.approx(1000.0, abs=1e-6)


def test_bond_terms_validation():
    with pytest.raises(DomainError):
        BondTerms(maturity=3.1)
    with pytest.raises(DomainError):
        BondTerms(face=0.0)
