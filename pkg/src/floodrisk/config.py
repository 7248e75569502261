"""Pipeline configuration.

Settings come from a TOML file with one table per concern (``data``,
``evt``, ``risk``, ``mcdm``, ``bond``, ``run``). Command-line flags override
file values, and file values override the built-in defaults below. Relative
paths in the ``data`` table resolve against the directory of the file that
names them.

Without ``--config`` the bundled ``pipeline.toml`` is used, which points at
the bundled datasets.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .catbond import BondTerms, TriggerModel, VasicekFactor, VasicekPair
from .errors import ConfigError, FloodRiskError
from .evt import GpdParams

DEFAULTS: dict[str, Any] = {
    "data": {
        "losses": None,
        "cpi": None,
        "exceedance_counts": None,
        "indicators": None,
        "base_year": 2019,
    },
    "evt": {
        "threshold_quantile": 0.7,
        "threshold": None,
        "obs_per_block": 365.25,
        "n_boot": 2000,
        "mrl_grid": [0.0, 60.0, 61],
        "stability_grid": [10.0, 35.0, 26],
        "min_exceedances": 10,
    },
    "risk": {
        "model": "pp",
        "levels": [0.85, 0.90, 0.95, 0.975],
        "backtest_levels": [0.01, 0.025, 0.05, 0.10, 0.15],
    },
    "mcdm": {
        "method": "gra",
        "weights": "equal",
        "zeta": 0.5,
        "a": 0.01,
        "breaks": [4, 14],
    },
    "bond": {
        "face": 1000.0,
        "maturity": 3.0,
        "coupon_interval": 0.25,
        "spread": 0.05,
        "kappa": 0.42,
        "n_paths": 100_000,
        "block_size": 10_000,
        "workers": 1,
        "rate_form": "exact",
        "trigger": {
            "thresholds": [626.0, 744.0, 849.0, 985.0],
            "fractions": [0.005, 0.015, 0.15, 0.20],
            "rate": 2.55,
        },
        "severity": {"scale": 258.55, "shape": -0.181, "threshold": 600.0},
        "rates": {
            "rate": {"a": 1.52, "b": 0.0412, "sigma": 0.014, "x0": 0.0228},
            "reference": {"a": 0.04, "b": 0.0202, "sigma": 0.04, "x0": 0.0243},
            "rho": 0.89,
        },
        "calibrate": {"target": 1000.0, "bracket": [0.0, 1.5], "tol": 0.5, "max_iter": 60},
        "sweep": {
            "parameter": "kappa",
            "kappa_grid": [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
            "shape_grid": [-0.30, -0.25, -0.20, -0.15, -0.10, -0.05],
            "scale_to_shape": -1432.311,
        },
    },
    "run": {"seed": None, "out": "floodrisk-out"},
}

SECTIONS = tuple(DEFAULTS)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("floodrisk") / "datasets" / name))


def _merge(base: dict, override: dict, where: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key {where}{key}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}{key} must be a table")
            out[key] = _merge(base[key], value, f"{where}{key}.")
        else:
            out[key] = value
    return out


@dataclass
class PipelineConfig:
    """Resolved settings for every command."""

    raw: dict
    source: Path | None

    @classmethod
    def load(cls, path=None) -> "PipelineConfig":
        src = Path(path) if path is not None else bundled_path("pipeline.toml")
        if not src.is_file():
            raise ConfigError(f"configuration file not found: {src}")
        try:
            with src.open("rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{src}: {exc}") from None
        raw = _merge(DEFAULTS, doc, "")
        base = src.resolve().parent
        for key in ("losses", "cpi", "exceedance_counts", "indicators"):
            v = raw["data"][key]
            if v is not None:
                p = Path(v)
                raw["data"][key] = str(p if p.is_absolute() else base / p)
        return cls(raw, src)

    def override(self, section: str, **values) -> None:
        """Apply non-None flag values on top of file settings."""
        for key, value in values.items():
            if value is None:
                continue
            node = self.raw[section]
            parts = key.split(".")
            for p in parts[:-1]:
                node = node[p]
            node[parts[-1]] = value

    def __getitem__(self, section):
        return self.raw[section]

    # -- validation helpers -------------------------------------------------

    def require_file(self, key: str) -> Path:
        v = self.raw["data"][key]
        if v is None:
            raise ConfigError(f"data.{key} is not set")
        p = Path(v)
        if not p.is_file():
            raise ConfigError(f"data.{key}: file not found: {p}")
        return p

    def require_seed(self) -> int:
        seed = self.raw["run"]["seed"]
        if seed is None:
            raise ConfigError("this command is stochastic: pass --seed or set run.seed")
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
        return seed

    def out_dir(self) -> Path:
        return Path(self.raw["run"]["out"])

    def validate_evt(self) -> None:
        e = self.raw["evt"]
        if e["threshold"] is None:
            q = e["threshold_quantile"]
            if not isinstance(q, (int, float)) or not 0 < q < 1:
                raise ConfigError(f"evt.threshold_quantile must lie in (0, 1), got {q!r}")
        elif not isinstance(e["threshold"], (int, float)):
            raise ConfigError("evt.threshold must be a number")
        if not e["obs_per_block"] > 0:
            raise ConfigError("evt.obs_per_block must be positive")
        for key in ("mrl_grid", "stability_grid"):
            g = e[key]
            if len(g) != 3 or not g[0] < g[1] or int(g[2]) < 1:
                raise ConfigError(f"evt.{key} must be [start, stop, count] with start < stop")
        if int(e["n_boot"]) < 0:
            raise ConfigError("evt.n_boot must be nonnegative")

    def validate_risk(self) -> None:
        r = self.raw["risk"]
        if r["model"] not in ("pp", "gpd", "exp"):
            raise ConfigError(f"risk.model must be pp, gpd or exp, got {r['model']!r}")
        lv = r["levels"]
        if not lv or any(not 0 < q < 1 for q in lv) or any(a >= b for a, b in zip(lv, lv[1:])):
            raise ConfigError("risk.levels must be strictly increasing values in (0, 1)")
        if any(not 0 < q < 1 for q in r["backtest_levels"]):
            raise ConfigError("risk.backtest_levels must lie in (0, 1)")

    def validate_mcdm(self) -> None:
        m = self.raw["mcdm"]
        if m["method"] not in ("gra", "topsis"):
            raise ConfigError(f"mcdm.method must be gra or topsis, got {m['method']!r}")
        if m["weights"] not in ("equal", "entropy"):
            raise ConfigError(f"mcdm.weights must be equal or entropy, got {m['weights']!r}")
        if not 0 < m["zeta"] <= 1:
            raise ConfigError("mcdm.zeta must lie in (0, 1]")
        if not m["a"] > 0:
            raise ConfigError("mcdm.a must be positive")

    # -- bond objects ----------------------------------------------------------

    def bond_objects(self):
        """``(terms, trigger, rates)`` built and validated from ``bond``."""
        b = self.raw["bond"]
        try:
            terms = BondTerms(b["face"], b["maturity"], b["coupon_interval"], b["spread"])
            sev = GpdParams(**b["severity"])
            trig = TriggerModel(
                tuple(b["trigger"]["thresholds"]), tuple(b["trigger"]["fractions"]),
                b["trigger"]["rate"], sev,
            )
            rr = b["rates"]
            rates = VasicekPair(VasicekFactor(**rr["rate"]), VasicekFactor(**rr["reference"]), rr["rho"])
        except (FloodRiskError, TypeError) as exc:
            raise ConfigError(f"invalid bond configuration: {exc}") from None
        if int(b["n_paths"]) < 1 or int(b["block_size"]) < 1:
            raise ConfigError("bond.n_paths and bond.block_size must be positive")
        if int(b["workers"]) < 1:
            raise ConfigError("bond.workers must be at least 1")
        if b["rate_form"] not in ("exact", "printed"):
            raise ConfigError("bond.rate_form must be exact or printed")
        if not math.isfinite(float(b["kappa"])):
            raise ConfigError("bond.kappa must be finite")
        return terms, trig, rates

    def bond_echo(self) -> dict:
        """Bond settings that determine results (worker count excluded)."""
        b = copy.deepcopy(self.raw["bond"])
        b.pop("workers", None)
        return b
