import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floodrisk import evt, risk
from floodrisk.errors import DomainError, LayeringError

SHAPES = (-0.3, 0.0, 0.2)


def model(shape=-0.29, scale=25.82, u=17.19, fbar=0.30, rate=2.55):
    return risk.TailModel(evt.GpdParams(scale, shape, u), fbar, rate)


def simulate_losses(m, size, rng):
    """Draw from the full loss law restricted to the tail part above u."""
    y = evt.gpd_quantile(rng.random(size), m.gpd)
    return m.u + y


# -- exceedance probability and return levels ------------------------------------


def test_exceed_prob_boundaries():
    m = model()
    assert risk.exceed_prob(m.u + 1e-12, m) == pytest.approx(m.tail_prob)
    assert risk.exceed_prob(m.gpd.upper_endpoint, m) == 0.0
    assert risk.exceed_prob(m.gpd.upper_endpoint + 10, m) == 0.0
    with pytest.raises(DomainError):
        risk.exceed_prob(m.u, m)


def test_exceed_prob_simulation_oracle():
    m = model()
    rng = np.random.default_rng(0)
    n = 10**6
    tail = rng.random(n) < m.tail_prob
    x = np.where(tail, simulate_losses(m, n, rng), 0.0)
    hit = x > 46.97
    p_hat, se = hit.mean(), hit.std() / math.sqrt(n)
    assert abs(risk.exceed_prob(46.97, m) - p_hat) < 3 * se


@pytest.mark.parametrize("shape", SHAPES)
def test_return_level(shape):
    m = model(shape=shape)
    assert risk.return_level(1 / m.tail_prob, m) == pytest.approx(m.u)
    levels = [risk.return_level(T, m) for T in (5, 10, 50, 100)]
    assert all(a < b for a, b in zip(levels, levels[1:]))
    for T in (5, 10, 50, 100):
        assert risk.exceed_prob(risk.return_level(T, m), m) == pytest.approx(1 / T, abs=1e-10)
    with pytest.raises(DomainError):
        risk.return_level(2.0, m)


# -- VaR and CVaR --------------------------------------------------------------------


@pytest.mark.parametrize("shape", SHAPES)
def test_var_inverts_exceed_prob(shape):
    m = model(shape=shape)
    for q in (0.75, 0.85, 0.95, 0.99, 0.999):
        assert risk.exceed_prob(risk.var(q, m), m) == pytest.approx(1 - q, abs=1e-10)
    x = m.u + 13.0
    assert risk.var(1 - risk.exceed_prob(x, m), m) == pytest.approx(x, rel=1e-10)


def test_var_boundary_and_domain():
    m = model()
    assert risk.var(1 - m.tail_prob + 1e-12, m) == pytest.approx(m.u, abs=1e-8)
    with pytest.raises(DomainError):
        risk.var(0.5, m)
    with pytest.raises(DomainError):
        risk.var(1.0, m)


@pytest.mark.parametrize("shape", SHAPES)
def test_cvar_exceeds_var_and_is_monotone(shape):
    m = model(shape=shape)
    qs = np.linspace(0.75, 0.995, 20)
    v = [risk.var(q, m) for q in qs]
    c = [risk.cvar(q, m) for q in qs]
    assert all(ci > vi for ci, vi in zip(c, v))
    assert np.all(np.diff(v) > 0) and np.all(np.diff(c) > 0)


@pytest.mark.parametrize("shape", SHAPES)
def test_cvar_simulation_oracle(shape):
    m = model(shape=shape)
    rng = np.random.default_rng(1)
    x = simulate_losses(m, 2 * 10**6, rng)
    q = 0.95
    v = risk.var(q, m)
    tail = x[x > v]
    assert abs(risk.cvar(q, m) - tail.mean()) < 3 * tail.std(ddof=1) / math.sqrt(tail.size)


def test_cvar_with_linked_gev_matches_gpd_form():
    gev = evt.GevParams(83.34, 6.64, -0.29)
    gpd = evt.gev_gpd_link(gev, 17.19)
    m = risk.TailModel(gpd, 0.3, 2.55)
    assert risk.cvar(0.95, m, gev) == pytest.approx(risk.cvar(0.95, m), rel=1e-12)
    with pytest.raises(DomainError):
        risk.cvar(0.95, m, evt.GevParams(83.34, 6.64, -0.1))


def test_infinite_mean_refused():
    m = model(shape=1.2)
    with pytest.raises(DomainError):
        risk.cvar(0.95, m)
    with pytest.raises(DomainError):
        risk.expected_annual_loss(m)


@pytest.mark.parametrize("fn", ["var", "cvar", "return_level"])
def test_shape_zero_continuity(fn):
    arg = 50.0 if fn == "return_level" else 0.95
    f = getattr(risk, fn)
    base = f(arg, model(shape=0.0))
    eps = 1e-6
    up, down = f(arg, model(shape=eps)), f(arg, model(shape=-eps))
    # the first-order term in xi cancels in the average, leaving only the
    # error introduced by switching to the exponential branch
    assert abs(0.5 * (up + down) - base) / base < 1e-6
    # one-sided differences agree with a centered slope taken further out
    slope = (f(arg, model(shape=1e-3)) - f(arg, model(shape=-1e-3))) / 2e-3
    assert (up - base) / eps == pytest.approx(slope, rel=1e-2)
    assert (base - down) / eps == pytest.approx(slope, rel=1e-2)


# -- aggregate loss --------------------------------------------------------------------


def test_expected_annual_loss_zero_rate():
    assert risk.expected_annual_loss(model(rate=0.0)) == 0.0


@pytest.mark.parametrize("shape", SHAPES)
def test_expected_annual_loss_compound_poisson(shape):
    m = model(shape=shape)
    rng = np.random.default_rng(2)
    years = 200_000
    n = rng.poisson(m.rate, years)
    x = simulate_losses(m, int(n.sum()), rng)
    idx = np.repeat(np.arange(years), n)
    s = np.bincount(idx, weights=x, minlength=years)
    assert abs(risk.expected_annual_loss(m) - s.mean()) < 3 * s.std(ddof=1) / math.sqrt(years)


def test_annual_var_solves_poisson_maximum():
    m = model()
    for q in (0.85, 0.95, 0.99):
        x = risk.annual_var(q, m)
        cond = risk.exceed_prob(x, m) / m.tail_prob
        assert math.exp(-m.rate * cond) == pytest.approx(q, rel=1e-10)
    with pytest.raises(DomainError):
        risk.annual_var(0.01, m)


# -- back-test -------------------------------------------------------------------------


def test_backtest_enumeration():
    (r,) = risk.backtest_spillover([1.0, 2.0, 3.0], [(0.5, 2.0)])
    assert r.count == 1 and r.rate == pytest.approx(1 / 3)
    (r,) = risk.backtest_spillover([1.0, 2.0, 3.0], [(0.5, -math.inf)])
    assert r.count == 3


def test_backtest_fixture_published_values(losses):
    res = risk.backtest_spillover(losses, [(0.05, 46.97)])
    assert res[0].count == 8
    assert res[0].rate == pytest.approx(0.0851, abs=5e-5)


def test_backtest_rate_is_exact_fraction():
    x = np.arange(7.0)
    for r in risk.backtest_spillover(x, [(0.1, 2.5), (0.2, 4.5)]):
        assert r.rate == r.count / 7


# -- compensation layers -------------------------------------------------------------------


def test_layers_from_published_boundaries():
    layers = risk.compensation_layers([28.76, 53.48, 64.70])
    assert [l.taker for l in layers] == [
        risk.Taker.INSURER, risk.Taker.CRFCIF, risk.Taker.REINSURANCE, risk.Taker.CATBOND
    ]
    assert layers[-1].name == "Fourth level" and math.isinf(layers[-1].upper)


def test_single_level_two_layers():
    layers = risk.build_compensation_table(model(), None, [0.9])
    assert len(layers) == 2
    assert layers[0].upper == pytest.approx(risk.var(0.9, model()))
    assert layers[1].taker == risk.Taker.CATBOND


def test_layers_reject_non_monotone():
    with pytest.raises(LayeringError):
        risk.compensation_layers([50.0, 40.0])
    with pytest.raises(LayeringError):
        risk.build_compensation_table(model(), None, [0.95, 0.9])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=3, unique=True))
def test_layers_partition(bounds):
    layers = risk.compensation_layers(sorted(bounds))
    assert layers[0].lower == 0.0 and math.isinf(layers[-1].upper)
    for a, b in zip(layers, layers[1:]):
        assert a.upper == b.lower


@settings(max_examples=100, deadline=None)
@given(
    shape=st.floats(-0.45, 0.6), scale=st.floats(0.5, 100), fbar=st.floats(0.05, 1.0),
    q=st.floats(0.0, 1.0),
)
def test_var_inverse_property(shape, scale, fbar, q):
    m = risk.TailModel(evt.GpdParams(scale, shape, 10.0), fbar)
    level = 1 - fbar * (0.001 + 0.998 * q)
    v = risk.var(level, m)
    assert risk.exceed_prob(v, m) == pytest.approx(1 - level, rel=1e-8, abs=1e-12)
