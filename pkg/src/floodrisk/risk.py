"""Tail risk measures, back-testing and the layered compensation scheme.

All measures use the peaks-over-threshold tail

    P(X > x) = Fbar_u * (1 + xi (x - u) / scale)^(-1/xi),   x > u,

where ``Fbar_u`` is the probability of exceeding the threshold ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, LayeringError
from .evt import XI_EPS, GevParams, GpdParams

_TOL = 1e-12


@dataclass(frozen=True)
class TailModel:
    """GPD tail above ``gpd.threshold`` with its exceedance probability.

    ``rate`` is the mean number of threshold exceedances per year.
    """

    gpd: GpdParams
    tail_prob: float
    rate: float = 0.0

    def __post_init__(self):
        if not 0 < self.tail_prob <= 1:
            raise DomainError(f"tail probability must lie in (0, 1], got {self.tail_prob}")
        if not self.rate >= 0:
            raise DomainError(f"event rate must be nonnegative, got {self.rate}")

    @property
    def u(self):
        return self.gpd.threshold

    @property
    def scale(self):
        return self.gpd.scale

    @property
    def shape(self):
        return self.gpd.shape


class Taker(str, Enum):
    INSURER = "Insurer"
    CRFCIF = "CRFCIF"
    REINSURANCE = "Reinsurance"
    CATBOND = "CatBond"


@dataclass(frozen=True)
class CompensationLayer:
    name: str
    lower: float
    upper: float
    taker: Taker

    def to_dict(self):
        return {
            "name": self.name,
            "lower": self.lower,
            "upper": None if math.isinf(self.upper) else self.upper,
            "taker": self.taker.value,
        }


@dataclass(frozen=True)
class BacktestResult:
    level: float
    value: float
    theoretical: float
    expected_count: int
    count: int
    rate: float
    measure: str = ""

    def to_dict(self):
        return {
            "measure": self.measure,
            "level": self.level,
            "value": self.value,
            "theoretical": self.theoretical,
            "expected_count": self.expected_count,
            "count": self.count,
            "rate": self.rate,
        }


def exceed_prob(x, model: TailModel):
    """Probability that a loss exceeds ``x`` (``x`` above the threshold)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= model.u):
        raise DomainError(f"exceedance probability needs x > u = {model.u}")
    z = (xa - model.u) / model.scale
    xi = model.shape
    if abs(xi) < XI_EPS:
        out = model.tail_prob * np.exp(-z)
    else:
        base = 1.0 + xi * z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(base > 0, model.tail_prob * np.power(np.maximum(base, 0), -1.0 / xi), 0.0)
    return float(out) if out.ndim == 0 else out


def _tail_quantile(r, model: TailModel):
    """Loss exceeded with probability ``r * Fbar_u``, i.e. u + GPD^-1(1 - r)."""
    xi, s = model.shape, model.scale
    if abs(xi) < XI_EPS:
        return model.u - s * math.log(r)
    return model.u + s / xi * math.expm1(-xi * math.log(r))


def return_level(T: float, model: TailModel) -> float:
    """Loss level exceeded on average once every ``T`` observations."""
    tf = T * model.tail_prob
    if not tf >= 1 - _TOL:
        raise DomainError(f"return period {T} is shorter than 1/Fbar_u = {1 / model.tail_prob}")
    return _tail_quantile(min(1.0 / tf, 1.0), model)


def var(q: float, model: TailModel) -> float:
    """Value-at-Risk: the ``q`` quantile of the loss distribution.

    Only levels with ``q > 1 - Fbar_u`` lie in the modelled tail.
    """
    if not 0 < q < 1:
        raise DomainError(f"VaR level must lie in (0, 1), got {q}")
    if not q > 1 - model.tail_prob:
        raise DomainError(
            f"VaR level {q} is not above 1 - Fbar_u = {1 - model.tail_prob}; "
            "outside the tail model"
        )
    return _tail_quantile((1 - q) / model.tail_prob, model)


def _check_mean(model: TailModel):
    if model.shape >= 1:
        raise DomainError(f"shape {model.shape} >= 1: tail mean is infinite")


def _check_gev(model: TailModel, gev: GevParams | None):
    """Return ``sigma - xi*mu`` from the GEV set, or its GPD equivalent."""
    xi = model.shape
    if gev is None:
        return model.scale - xi * model.u
    if abs(gev.shape - xi) > 1e-9:
        raise DomainError("GEV and GPD shapes differ")
    return gev.scale - gev.shape * gev.loc


def cvar(q: float, model: TailModel, gev: GevParams | None = None) -> float:
    """Conditional tail expectation E[X | X > VaR_q].

    Computed as ``(VaR_q + sigma - xi*mu) / (1 - xi)``. Without ``gev`` the
    constant ``sigma - xi*mu`` is taken from the GPD as ``scale - xi*u``,
    which gives the same value when the GPD is the GEV linked at ``u``.
    """
    _check_mean(model)
    v = var(q, model)
    c = _check_gev(model, gev)
    return (v + c) / (1 - model.shape)


def mean_exceedance_loss(model: TailModel, gev: GevParams | None = None) -> float:
    """E[X | X > u] = (u + sigma - xi*mu) / (1 - xi)."""
    _check_mean(model)
    return (model.u + _check_gev(model, gev)) / (1 - model.shape)


def expected_annual_loss(model: TailModel, gev: GevParams | None = None) -> float:
    """Expected yearly total of threshold-exceeding losses, rate * E[X | X > u]."""
    _check_mean(model)
    if model.rate == 0:
        return 0.0
    return model.rate * mean_exceedance_loss(model, gev)


def annual_var(q: float, model: TailModel) -> float:
    """Quantile of the annual maximum loss under Poisson exceedances.

    Solves ``exp(-rate * P(X > x | X > u)) = q`` for ``x``. This is the
    annualized counterpart of :func:`var`.
    """
    if model.rate <= 0:
        raise DomainError("annual VaR needs a positive event rate")
    if not 0 < q < 1:
        raise DomainError(f"level must lie in (0, 1), got {q}")
    r = -math.log(q) / model.rate
    if r >= 1:
        raise DomainError(f"level {q} is below P(no exceedance in a year)")
    return _tail_quantile(r, model)


def backtest_spillover(sample, measure_values, measure: str = "") -> list[BacktestResult]:
    """Count sample points strictly above each risk-measure value.

    Parameters
    ----------
    sample : array_like
    measure_values : sequence of (level, value)
        ``level`` is the significance level (e.g. 0.05 for a 95% measure),
        which is also the theoretical spillover rate.
    """
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise DomainError("back-test needs a nonempty sample")
    out = []
    for level, value in measure_values:
        count = int(np.count_nonzero(x > value))
        out.append(
            BacktestResult(
                level=float(level),
                value=float(value),
                theoretical=float(level),
                expected_count=int(math.floor(level * x.size + 0.5)),
                count=count,
                rate=count / x.size,
                measure=measure,
            )
        )
    return out


_LEVEL_NAMES = ("First level", "Second level", "Third level", "Fourth level")
_TAKERS = (Taker.INSURER, Taker.CRFCIF, Taker.REINSURANCE, Taker.CATBOND)


def compensation_layers(boundaries: Sequence[float]) -> list[CompensationLayer]:
    """Split (0, inf) at the given boundaries and assign risk takers.

    Up to three boundaries are allowed. The lowest layer goes to insurers,
    the top layer to the catastrophe bond, and the ones in between to the
    catastrophe fund (CRFCIF) and then reinsurance.
    """
    b = [float(v) for v in boundaries]
    if not 1 <= len(b) <= 3:
        raise LayeringError(f"between 1 and 3 boundaries are needed, got {len(b)}")
    edges = [0.0] + b + [math.inf]
    if any(not lo < hi for lo, hi in zip(edges, edges[1:])):
        raise LayeringError(f"layer boundaries are not strictly increasing: {b}")
    m = len(edges) - 1
    takers = list(_TAKERS[: m - 1]) + [Taker.CATBOND]
    return [
        CompensationLayer(_LEVEL_NAMES[i], edges[i], edges[i + 1], takers[i]) for i in range(m)
    ]


def build_compensation_table(
    model: TailModel, gev: GevParams | None, levels: Sequence[float]
) -> list[CompensationLayer]:
    """Layered compensation scheme from VaR/CVaR boundaries.

    The first boundary is VaR at ``levels[0]`` and the next ones are CVaR at
    ``levels[1]`` and ``levels[2]``; further levels are ignored. With levels
    (0.85, 0.90, 0.95) insurers cover losses up to VaR 85%, the catastrophe
    fund up to CVaR 90%, reinsurance up to CVaR 95% and the bond the rest.
    """
    lv = [float(q) for q in levels]
    if not lv:
        raise LayeringError("at least one level is required")
    if any(a >= b for a, b in zip(lv, lv[1:])):
        raise LayeringError(f"levels must be strictly increasing: {lv}")
    bounds = [var(lv[0], model)] + [cvar(q, model, gev) for q in lv[1:3]]
    return compensation_layers(bounds)


def relative_deviation(computed: float, published: float) -> float:
    return (computed - published) / abs(published)
