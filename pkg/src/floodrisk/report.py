"""Assembly of the JSON documents written by the command line."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import data, evt, mcdm, risk

SCHEMA_VERSION = "1.0"

# Published reference figures used for the consistency section.
PUBLISHED = {
    "loss_summary": {"size": 94, "min": 0.12, "median": 9.69, "mean": 15.45, "max": 78.65,
                     "skewness": 1.72, "kurtosis": 5.56},
    "precip_summary": {"size": 94, "min": 75.0, "median": 479.5, "mean": 530.07, "max": 1426.0,
                       "skewness": 0.79, "kurtosis": 3.65},
    "precip_quantiles": {0.70: 626.0, 0.80: 744.0, 0.90: 849.0, 0.95: 985.0},
    "pp": {"loc": 83.34, "scale": 6.64, "shape": -0.29, "aic": 22.16, "bic": 26.16},
    "gpd": {"scale": 27.11, "shape": -0.32, "aic": 226.76, "bic": 229.42},
    "exponential": {"scale": 20.18, "aic": 226.27, "bic": 227.60},
    "rate": 2.55,
    "var": {0.99: 72.94, 0.975: 58.26, 0.95: 46.97, 0.90: 35.53, 0.85: 28.76},
    "cvar": {0.99: 90.16, 0.975: 75.77, 0.95: 64.70, 0.90: 53.48, 0.85: 46.85},
    "var_count": {0.99: 1, 0.975: 4, 0.95: 8, 0.90: 11, 0.85: 19},
    "cvar_count": {0.99: 0, 0.975: 1, 0.95: 3, 0.90: 5, 0.85: 8},
    "mean_exceedance_loss": 33.84,
    "expected_annual_loss": 86.29,
    "layer_bounds": (28.76, 53.48, 64.70),
    "gra_top": ("Jiangxi", 0.6882),
    "topsis_top": ("Heilongjiang", 0.5471),
    "kappa": 0.42,
}


def _clean(obj):
    """Make an object JSON-safe: NaN/inf become None, numpy scalars floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def entry(quantity: str, published: float, computed: float) -> dict:
    dev = risk.relative_deviation(computed, published) if published != 0 else math.nan
    return {"quantity": quantity, "published": published, "computed": computed,
            "rel_deviation": dev}


def threshold_of(x, evt_cfg) -> float:
    if evt_cfg.get("threshold") is not None:
        return float(evt_cfg["threshold"])
    return float(data.empirical_quantile(x, evt_cfg["threshold_quantile"]))


def fit_models(x, u, obs_per_block=evt.DAYS_PER_YEAR):
    es = evt.ExcessSample.from_sample(x, u)
    return {
        "gpd": evt.fit_gpd(es),
        "exponential": evt.fit_exponential(es),
        "pp": evt.fit_pp(x, u, obs_per_block=obs_per_block),
        "sample": es,
    }


def fit_consistency(fits) -> list[dict]:
    out = []
    for model in ("pp", "gpd", "exponential"):
        f = fits[model]
        est = dict(zip(f.names, f.estimates))
        for k, v in PUBLISHED[model].items():
            got = est[k] if k in est else getattr(f, k)
            out.append(entry(f"{model}.{k}", v, got))
    return out


def tail_model(fits, x, rate: float, model: str = "pp"):
    """Tail model and optional GEV set for the requested basis."""
    es = fits["sample"]
    u = es.threshold
    if model == "pp":
        gev = fits["pp"].params
        gpd = evt.gev_gpd_link(gev, u)
    elif model == "gpd":
        gev, gpd = None, fits["gpd"].params
    else:
        gev, gpd = None, fits["exponential"].params
    return risk.TailModel(gpd, es.tail_prob, rate), gev


def risk_document(x, fits, rate: float, model: str, levels, backtest_levels) -> dict:
    tm, gev = tail_model(fits, x, rate, model)
    all_levels = sorted(set(levels) | {1 - a for a in backtest_levels})
    measures = []
    for q in all_levels:
        row = {"level": q, "var": risk.var(q, tm), "cvar": risk.cvar(q, tm, gev)}
        try:
            row["annual_var"] = risk.annual_var(q, tm)
        except risk.DomainError:  # outside the annual-maximum domain
            row["annual_var"] = None
        measures.append(row)
    by_q = {round(m["level"], 10): m for m in measures}
    bt_var = risk.backtest_spillover(
        x, [(a, by_q[round(1 - a, 10)]["var"]) for a in backtest_levels], "VaR")
    bt_cvar = risk.backtest_spillover(
        x, [(a, by_q[round(1 - a, 10)]["cvar"]) for a in backtest_levels], "CVaR")
    pub_var = risk.backtest_spillover(
        x, [(round(1 - q, 10), v) for q, v in sorted(PUBLISHED["var"].items())], "VaR")
    pub_cvar = risk.backtest_spillover(
        x, [(round(1 - q, 10), v) for q, v in sorted(PUBLISHED["cvar"].items())], "CVaR")
    layers = risk.build_compensation_table(tm, gev, levels)
    mel = risk.mean_exceedance_loss(tm, gev)
    eal = risk.expected_annual_loss(tm, gev)

    consistency = []
    for q, v in sorted(PUBLISHED["var"].items()):
        consistency.append(entry(f"var@{q}", v, risk.var(q, tm)))
    for q, v in sorted(PUBLISHED["cvar"].items()):
        consistency.append(entry(f"cvar@{q}", v, risk.cvar(q, tm, gev)))
    for q, v in sorted(PUBLISHED["var"].items()):
        try:
            consistency.append(entry(f"annual_var@{q}", v, risk.annual_var(q, tm)))
        except risk.DomainError:
            pass
    for i, b in enumerate(PUBLISHED["layer_bounds"][: len(layers) - 1]):
        consistency.append(entry(f"layer_bound_{i + 1}", b, layers[i].upper))
    consistency.append(entry("rate", PUBLISHED["rate"], rate))
    consistency.append(entry("mean_exceedance_loss", PUBLISHED["mean_exceedance_loss"], mel))
    consistency.append(entry("expected_annual_loss", PUBLISHED["expected_annual_loss"], eal))
    for r in pub_var + pub_cvar:
        q = round(1 - r.level, 10)
        pub = PUBLISHED["var_count" if r.measure == "VaR" else "cvar_count"][q]
        consistency.append(entry(f"{r.measure.lower()}_count@{q}", pub, r.count))

    return {
        "basis": {
            "model": model,
            "threshold": tm.u,
            "tail_prob": tm.tail_prob,
            "rate": tm.rate,
            "gpd": tm.gpd.as_dict(),
            "gev": gev.as_dict() if gev is not None else None,
        },
        "measures": measures,
        "backtest": [r.to_dict() for r in bt_var + bt_cvar],
        "backtest_published_values": [r.to_dict() for r in pub_var + pub_cvar],
        "layers": [layer.to_dict() for layer in layers],
        "mean_exceedance_loss": mel,
        "expected_annual_loss": eal,
        "reference_consistency": consistency,
    }


def rank_document(m: mcdm.DecisionMatrix, zeta: float, a: float, breaks) -> dict:
    res = mcdm.compare_rankings(m, zeta=zeta, a=a)
    weights = mcdm.entropy_weights(mcdm.normalize_minmax(m), a)
    doc = {"entropy_weights": dict(zip(m.criteria, weights)), "rankings": {}}
    for key, r in res.items():
        tiers = mcdm.assign_tiers(r, breaks).tiers
        doc["rankings"][key] = [
            {"province": n, "score": s, "rank": k, "tier": tiers[n]} for n, s, k in r.ordered()
        ]
    top_g = res["gra_equal"].ordered()[0]
    top_t = res["topsis_entropy"].ordered()[0]
    doc["reference_consistency"] = [
        entry(f"gra_equal.{PUBLISHED['gra_top'][0]}", PUBLISHED["gra_top"][1],
              res["gra_equal"].score_of(PUBLISHED["gra_top"][0])),
        entry(f"topsis_entropy.{PUBLISHED['topsis_top'][0]}", PUBLISHED["topsis_top"][1],
              res["topsis_entropy"].score_of(PUBLISHED["topsis_top"][0])),
    ]
    doc["top"] = {"gra_equal": top_g[0], "topsis_entropy": top_t[0]}
    return doc, res
