"""Layered precipitation trigger and distorted severity sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from ..errors import DomainError
from ..evt import XI_EPS, GpdParams

# cumulative wipe-out at or above this counts as total loss of principal
WIPEOUT_TOL = 1e-12


@dataclass(frozen=True)
class TriggerModel:
    """Layered wipe-out schedule driven by Poisson precipitation events.

    ``thresholds[k]`` opens layer ``k``; an event with severity ``x`` in
    ``(thresholds[k], thresholds[k+1]]`` wipes ``fractions[k]`` of the
    principal. ``severity`` is the GPD of precipitation above its own
    threshold and ``rate`` the yearly number of such events.
    """

    thresholds: tuple[float, ...]
    fractions: tuple[float, ...]
    rate: float
    severity: GpdParams

    def __post_init__(self):
        th = tuple(float(v) for v in self.thresholds)
        fr = tuple(float(v) for v in self.fractions)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "fractions", fr)
        if len(th) == 0 or len(th) != len(fr):
            raise DomainError("need one wipe fraction per layer threshold")
        if any(a >= b for a, b in zip(th, th[1:])):
            raise DomainError(f"layer thresholds must be strictly increasing: {th}")
        if any(not 0 <= f <= 1 for f in fr):
            raise DomainError(f"wipe fractions must lie in [0, 1]: {fr}")
        if not self.rate >= 0:
            raise DomainError(f"event rate must be nonnegative, got {self.rate}")

    def with_(self, **changes) -> "TriggerModel":
        d = {
            "thresholds": self.thresholds,
            "fractions": self.fractions,
            "rate": self.rate,
            "severity": self.severity,
        }
        d.update(changes)
        return TriggerModel(**d)

    def as_dict(self):
        return {
            "thresholds": list(self.thresholds),
            "fractions": list(self.fractions),
            "rate": self.rate,
            "severity": self.severity.as_dict(),
        }


DEFAULT_TRIGGER = TriggerModel(
    thresholds=(626.0, 744.0, 849.0, 985.0),
    fractions=(0.005, 0.015, 0.15, 0.20),
    rate=2.55,
    severity=GpdParams(scale=258.55, shape=-0.181, threshold=600.0),
)


@dataclass(frozen=True)
class TriggerPath:
    """One realization of the trigger process on ``[0, T]``."""

    times: np.ndarray
    severities: np.ndarray
    increments: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        """Y just after each event."""
        return np.cumsum(self.increments)

    def level_at(self, t: float) -> float:
        """Y_t, right-continuous."""
        k = int(np.searchsorted(self.times, t, side="right"))
        return float(self.increments[:k].sum())


def simulate_event_times(rate: float, T: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson arrival times on ``[0, T]`` from exponential inter-arrivals."""
    if rate < 0:
        raise DomainError("event rate must be nonnegative")
    if rate == 0:
        return np.empty(0)
    times = []
    t = rng.exponential(1.0 / rate)
    while t <= T:
        times.append(t)
        t += rng.exponential(1.0 / rate)
    return np.array(times)


def distorted_quantile(U, gpd: GpdParams, kappa: float):
    """Severity at uniform level ``U`` under the Wang-distorted law.

    With ``p = 1 - Phi(Phi^-1(U) + kappa)``, the draw is
    ``u + (p^(-xi) - 1) * scale / xi``; ``kappa = 0`` is the plain inverse
    CDF of the GPD.
    """
    U = np.asarray(U, dtype=float)
    # 1 - Phi(z) computed as Phi(-z) keeps precision in the upper tail
    p = ndtr(-(ndtri(U) + kappa))
    xi, beta = gpd.shape, gpd.scale
    if abs(xi) < XI_EPS:
        out = gpd.threshold - beta * np.log(p)
    else:
        out = gpd.threshold + np.expm1(-xi * np.log(p)) * beta / xi
    return float(out) if out.ndim == 0 else out


def sample_severity_distorted(gpd: GpdParams, kappa: float, rng: np.random.Generator, size=None):
    """Draw severities from the distorted GPD by inverse transform."""
    return distorted_quantile(rng.random(size), gpd, kappa)


def trigger_increment(x, layers: TriggerModel | tuple[Sequence[float], Sequence[float]]):
    """Principal fraction wiped by an event of severity ``x``.

    Layers are right-closed: with thresholds (626, 744, ...) an event of 744
    falls in the first layer.
    """
    if isinstance(layers, TriggerModel):
        th, fr = layers.thresholds, layers.fractions
    else:
        th, fr = layers
    th = np.asarray(th, dtype=float)
    table = np.concatenate([[0.0], np.asarray(fr, dtype=float)])
    idx = np.searchsorted(th, np.asarray(x, dtype=float), side="left")
    out = table[idx]
    return float(out) if out.ndim == 0 else out


def payoff(y):
    """Remaining principal fraction max(1 - y, 0)."""
    out = np.maximum(1.0 - np.asarray(y, dtype=float), 0.0)
    return float(out) if out.ndim == 0 else out


def build_path(times, severities, trigger: TriggerModel) -> TriggerPath:
    times = np.asarray(times, dtype=float)
    sev = np.asarray(severities, dtype=float)
    if times.shape != sev.shape:
        raise DomainError("times and severities must have equal length")
    if np.any(np.diff(times) < 0):
        raise DomainError("event times must be nondecreasing")
    return TriggerPath(times, sev, np.asarray(trigger_increment(sev, trigger), dtype=float).reshape(sev.shape))


def wipeout_time(path: TriggerPath) -> float | None:
    """First event time at which the cumulative wipe-out reaches 1."""
    hit = np.nonzero(path.cumulative >= 1.0 - WIPEOUT_TOL)[0]
    return float(path.times[hit[0]]) if hit.size else None


def simulate_path(trigger: TriggerModel, T: float, kappa: float, rng) -> TriggerPath:
    times = simulate_event_times(trigger.rate, T, rng)
    sev = sample_severity_distorted(trigger.severity, kappa, rng, times.size)
    return build_path(times, sev, trigger)
