"""Command-line entry point: ``floodrisk <command> [options]``.

Exit codes: 0 on success, 1 for model or numerical failures, 2 for IO and
configuration problems. Every command validates its settings before doing
any work, so a failed validation leaves no output files behind.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, data, evt, mcdm, report
from .catbond import (
    Scenarios,
    calibrate_kappa,
    closed_form_coupon_bond,
    par_spread,
    price_bond,
    sensitivity_sweep,
)
from .config import PipelineConfig
from .errors import FloodRiskError, InputError


def _doc(command: str, cfg: PipelineConfig, body: dict) -> dict:
    out = {"schema_version": report.SCHEMA_VERSION, "command": command, "version": __version__}
    out.update(body)
    return out


def _load_losses(cfg: PipelineConfig):
    records = data.load_loss_csv(cfg.require_file("losses"))
    cpi = data.load_cpi_csv(cfg.require_file("cpi"))
    norm = data.normalize_cpi(records, cpi, int(cfg["data"]["base_year"]))
    return norm, data.losses(norm)


def _grid(g):
    start, stop, num = g
    return np.linspace(float(start), float(stop), int(num))


def _write_table(cfg, args, stem: str, header, rows, doc_extra=None) -> Path:
    out = cfg.out_dir()
    if args.format == "json":
        body = {"columns": list(header), "rows": [list(r) for r in rows]}
        if doc_extra:
            body.update(doc_extra)
        return report.write_json(out / f"{stem}.json", _doc(args.command, cfg, body))
    return evt.write_rows(out / f"{stem}.csv", header, rows)


# -- commands -----------------------------------------------------------------


def cmd_diagnose(cfg: PipelineConfig, args) -> int:
    cfg.require_file("losses")
    cfg.require_file("cpi")
    cfg.validate_evt()
    _, x = _load_losses(cfg)
    e = cfg["evt"]
    u = report.threshold_of(x, e)
    mrl = evt.mean_residual_life(x, _grid(e["mrl_grid"]))
    stab = evt.param_stability_scan(x, _grid(e["stability_grid"]), int(e["min_exceedances"]))
    fits = report.fit_models(x, u, e["obs_per_block"])
    linked = evt.gev_gpd_link(fits["pp"].params, u)
    qq = evt.qq_points(fits["sample"].excesses, linked)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        _write_table(cfg, args, "mrl", ("u", "mean_excess", "lo", "hi", "n_u"),
                     [(p.threshold, p.mean_excess, p.lo, p.hi, p.n_u) for p in mrl]),
        _write_table(cfg, args, "stability",
                     ("u", "n_u", "shape", "shape_lo", "shape_hi", "modified_scale",
                      "modified_scale_lo", "modified_scale_hi", "flag"),
                     [(p.threshold, p.n_u, p.shape, *p.shape_ci, p.modified_scale,
                       *p.modified_scale_ci, p.flag or "") for p in stab]),
        _write_table(cfg, args, "qq", ("model_q", "empirical_q"), qq),
    ]
    for p in paths:
        print(p)
    return 0


def cmd_fit(cfg: PipelineConfig, args) -> int:
    cfg.require_file("losses")
    cfg.require_file("cpi")
    cfg.require_file("exceedance_counts")
    cfg.validate_evt()
    seed = cfg.require_seed()
    records, x = _load_losses(cfg)
    _, counts = data.load_exceedance_counts(cfg.require_file("exceedance_counts"))
    e = cfg["evt"]
    u = report.threshold_of(x, e)
    fits = report.fit_models(x, u, e["obs_per_block"])
    stat, p = evt.lr_test(fits["gpd"], fits["exponential"], 1)
    linked = evt.gev_gpd_link(fits["pp"].params, u)
    pois = evt.fit_poisson_frequency(counts, n_boot=int(e["n_boot"]), seed=seed)
    summary = data.descriptive_stats(x)
    precip = data.precipitation(records)
    body = {
        "seed": seed,
        "threshold": u,
        "n": fits["sample"].n,
        "n_u": fits["sample"].n_u,
        "loss_summary": summary.as_dict(),
        "precip_summary": data.descriptive_stats(precip).as_dict(),
        "precip_quantiles": {str(q): data.empirical_quantile(precip, q) for q in (0.7, 0.8, 0.9, 0.95)},
        "fits": {k: fits[k].to_dict() for k in ("pp", "gpd", "exponential")},
        "pp_linked_gpd": linked.as_dict(),
        "lr_test_gpd_vs_exponential": {"statistic": stat, "df": 1, "p_value": p},
        "poisson": pois.to_dict(),
        "reference_consistency": report.fit_consistency(fits)
        + [report.entry("rate", report.PUBLISHED["rate"], pois.rate)]
        + [report.entry(f"loss_summary.{k}", v, getattr(summary, k))
           for k, v in report.PUBLISHED["loss_summary"].items()],
    }
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    print(report.write_json(out / "fit.json", _doc("fit", cfg, body)))
    return 0


def cmd_risk(cfg: PipelineConfig, args) -> int:
    cfg.require_file("losses")
    cfg.require_file("cpi")
    cfg.require_file("exceedance_counts")
    cfg.validate_evt()
    cfg.validate_risk()
    _, x = _load_losses(cfg)
    _, counts = data.load_exceedance_counts(cfg.require_file("exceedance_counts"))
    e, r = cfg["evt"], cfg["risk"]
    u = report.threshold_of(x, e)
    fits = report.fit_models(x, u, e["obs_per_block"])
    rate = evt.fit_poisson_frequency(counts, n_boot=0).rate
    body = report.risk_document(x, fits, rate, r["model"], r["levels"], r["backtest_levels"])
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    print(report.write_json(out / "risk_report.json", _doc("risk", cfg, body)))
    return 0


def cmd_rank(cfg: PipelineConfig, args) -> int:
    cfg.require_file("indicators")
    cfg.validate_mcdm()
    table = data.load_indicator_csv(cfg.require_file("indicators"))
    m = mcdm.DecisionMatrix.from_table(table)
    c = cfg["mcdm"]
    breaks = [int(b) for b in c["breaks"]]
    try:
        mcdm.assign_tiers(mcdm.RankResult(m.alternatives, np.zeros(len(m.alternatives)),
                                          np.arange(1, len(m.alternatives) + 1), "check"), breaks)
    except FloodRiskError as exc:
        raise InputError(f"mcdm.breaks: {exc}") from None
    doc, res = report.rank_document(m, c["zeta"], c["a"], breaks)
    key = {("gra", "equal"): "gra_equal", ("gra", "entropy"): "gra_entropy",
           ("topsis", "entropy"): "topsis_entropy"}.get((c["method"], c["weights"]))
    if key is None:  # topsis with equal weights
        chosen = mcdm.topsis_rank(m, mcdm.equal_weights(len(m.criteria)))
    else:
        chosen = res[key]
    tiers = mcdm.assign_tiers(chosen, breaks).tiers
    rows = [(n, s, k, tiers[n]) for n, s, k in chosen.ordered()]
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    stem = f"rank_{c['method']}_{c['weights']}"
    print(_write_table(cfg, args, stem, ("province", "score", "rank", "tier"), rows))
    doc["selected"] = {"method": c["method"], "weights": c["weights"], "zeta": c["zeta"], "a": c["a"],
                       "breaks": breaks}
    print(report.write_json(out / "rank_comparison.json", _doc("rank", cfg, doc)))
    return 0


def _bond_setup(cfg):
    terms, trigger, rates = cfg.bond_objects()
    seed = cfg.require_seed()
    b = cfg["bond"]
    scen = Scenarios(seed, int(b["n_paths"]), int(b["block_size"]))
    return terms, trigger, rates, seed, scen, int(b["workers"])


def cmd_price(cfg: PipelineConfig, args) -> int:
    terms, trigger, rates, seed, scen, workers = _bond_setup(cfg)
    b = cfg["bond"]
    res = price_bond(terms, trigger, rates, float(b["kappa"]), scenarios=scen, workers=workers,
                     form=b["rate_form"])
    body = {
        "seed": seed,
        "n_paths": res.n_paths,
        "result": res.to_dict(),
        "coupon_bond_without_trigger": closed_form_coupon_bond(terms, rates, b["rate_form"]),
        "config": cfg.bond_echo(),
    }
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    print(report.write_json(out / "price.json", _doc("price", cfg, body)))
    return 0


def cmd_calibrate(cfg: PipelineConfig, args) -> int:
    terms, trigger, rates, seed, scen, workers = _bond_setup(cfg)
    cal = cfg["bond"]["calibrate"]
    lo, hi = (float(v) for v in cal["bracket"])
    if not lo < hi:
        raise InputError("bond.calibrate.bracket must be [lo, hi] with lo < hi")
    res = calibrate_kappa(terms, trigger, rates, float(cal["target"]), (lo, hi),
                          tol=float(cal["tol"]), max_iter=int(cal["max_iter"]),
                          scenarios=scen, workers=workers)
    body = {
        "seed": seed,
        "n_paths": scen.n_paths,
        "result": res.to_dict(),
        "reference_consistency": [report.entry("kappa", report.PUBLISHED["kappa"], res.kappa)],
        "config": cfg.bond_echo(),
    }
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    print(report.write_json(out / "calibrate.json", _doc("calibrate", cfg, body)))
    return 0


def cmd_sweep(cfg: PipelineConfig, args) -> int:
    terms, trigger, rates, seed, scen, workers = _bond_setup(cfg)
    sw = cfg["bond"]["sweep"]
    param = sw["parameter"]
    if param not in ("kappa", "shape"):
        raise InputError(f"bond.sweep.parameter must be kappa or shape, got {param!r}")
    grid = sw["kappa_grid"] if param == "kappa" else sw["shape_grid"]
    if not grid:
        raise InputError("sweep grid is empty")
    rows = sensitivity_sweep(param, grid, terms, trigger, rates, float(cfg["bond"]["kappa"]),
                             scale_to_shape=float(sw["scale_to_shape"]), scenarios=scen,
                             workers=workers)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    table = [(r.value, r.price, r.se, r.scale, r.flag) for r in rows]
    header = ("value", "price", "se", "scale", "flag")
    meta = {"seed": seed, "n_paths": scen.n_paths, "parameter": param, "config": cfg.bond_echo()}
    print(_write_table(cfg, args, f"sweep_{param}", header, table, meta))
    if args.format != "json":
        print(report.write_json(out / f"sweep_{param}.json",
                                _doc("sweep", cfg, dict(meta, rows=[list(t) for t in table]))))
    return 0


COMMANDS = {
    "diagnose": cmd_diagnose,
    "fit": cmd_fit,
    "risk": cmd_risk,
    "rank": cmd_rank,
    "price": cmd_price,
    "calibrate": cmd_calibrate,
    "sweep": cmd_sweep,
}


GLOBAL_DEFAULTS = {"config": None, "seed": None, "out": None, "format": "csv"}


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS lets these flags appear before or after the subcommand
    # without the subparser resetting a value given earlier.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="TOML settings file (default: bundled)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="random seed; required by stochastic commands")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                        help="format of tabular outputs (default: csv)")

    p = argparse.ArgumentParser(prog="floodrisk", description="Flood catastrophe risk toolkit",
                                parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def threshold_opts(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--threshold", type=float, help="absolute threshold")
        g.add_argument("--quantile", type=float, help="threshold as an empirical quantile level")

    sp = sub.add_parser("diagnose", parents=[common], help="threshold diagnostics CSVs")
    threshold_opts(sp)
    sp = sub.add_parser("fit", parents=[common], help="PP, GPD, exponential and Poisson fits")
    threshold_opts(sp)
    sp.add_argument("--n-boot", type=int, help="bootstrap resamples for the Poisson check")
    sp = sub.add_parser("risk", parents=[common], help="VaR/CVaR, back-test and layers")
    threshold_opts(sp)
    sp.add_argument("--model", choices=("pp", "gpd", "exp"))
    sp = sub.add_parser("rank", parents=[common], help="GRA and TOPSIS vulnerability rankings")
    sp.add_argument("--method", choices=("gra", "topsis"))
    sp.add_argument("--weights", choices=("equal", "entropy"))
    sp.add_argument("--zeta", type=float)
    sp.add_argument("--amplitude", type=float, help="entropy shift a")
    sp.add_argument("--breaks", type=int, nargs="+")

    def bond_opts(sp):
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--spread", type=float)
        sp.add_argument("--rate", type=float, help="events per year")
        sp.add_argument("--n-paths", type=int)
        sp.add_argument("--workers", type=int)

    sp = sub.add_parser("price", parents=[common], help="Monte Carlo bond price")
    bond_opts(sp)
    sp = sub.add_parser("calibrate", parents=[common], help="distortion giving a target price")
    bond_opts(sp)
    sp.add_argument("--target", type=float)
    sp.add_argument("--bracket", type=float, nargs=2)
    sp = sub.add_parser("sweep", parents=[common], help="price across kappa or shape values")
    bond_opts(sp)
    sp.add_argument("--parameter", choices=("kappa", "shape"))
    sp.add_argument("--grid", type=float, nargs="+")
    return p


def _apply_flags(cfg: PipelineConfig, args) -> None:
    cfg.override("run", seed=args.seed, out=str(args.out) if args.out else None)
    if getattr(args, "threshold", None) is not None:
        cfg.override("evt", threshold=args.threshold)
    if getattr(args, "quantile", None) is not None:
        cfg["evt"]["threshold"] = None
        cfg.override("evt", threshold_quantile=args.quantile)
    cfg.override("evt", n_boot=getattr(args, "n_boot", None))
    cfg.override("risk", model=getattr(args, "model", None))
    cfg.override("mcdm", method=getattr(args, "method", None), weights=getattr(args, "weights", None),
                 zeta=getattr(args, "zeta", None), a=getattr(args, "amplitude", None),
                 breaks=getattr(args, "breaks", None))
    if hasattr(args, "kappa"):
        cfg.override("bond", kappa=args.kappa, spread=args.spread, n_paths=args.n_paths,
                      workers=args.workers)
        cfg.override("bond", **{"trigger.rate": args.rate})
    if getattr(args, "target", None) is not None or getattr(args, "bracket", None) is not None:
        cfg.override("bond", **{"calibrate.target": args.target, "calibrate.bracket": args.bracket})
    if getattr(args, "parameter", None) is not None:
        cfg.override("bond", **{"sweep.parameter": args.parameter})
    if getattr(args, "grid", None) is not None:
        param = cfg["bond"]["sweep"]["parameter"]
        cfg.override("bond", **{f"sweep.{param}_grid": args.grid})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        cfg = PipelineConfig.load(args.config)
        _apply_flags(cfg, args)
        return COMMANDS[args.command](cfg, args)
    except (InputError, OSError) as exc:
        print(f"floodrisk {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FloodRiskError as exc:
        print(f"floodrisk {args.command}: model error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
