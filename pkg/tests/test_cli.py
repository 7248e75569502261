import csv
import json

import pytest

from floodrisk import cli
from floodrisk.config import PipelineConfig, bundled_path
from floodrisk.errors import ConfigError

FAST = ["--n-paths", "4000"]


def run(args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_diagnose_writes_three_csvs(tmp_path):
    assert run(["diagnose", "--out", tmp_path]) == 0
    for name in ("mrl.csv", "stability.csv", "qq.csv"):
        assert (tmp_path / name).is_file()
    assert list(read_csv(tmp_path / "mrl.csv")[0]) == ["u", "mean_excess", "lo", "hi", "n_u"]
    assert list(read_csv(tmp_path / "qq.csv")[0]) == ["model_q", "empirical_q"]


def test_diagnose_golden_stable(tmp_path):
    run(["diagnose", "--out", tmp_path / "a"])
    run(["diagnose", "--out", tmp_path / "b"])
    assert (tmp_path / "a" / "mrl.csv").read_bytes() == (tmp_path / "b" / "mrl.csv").read_bytes()


def test_missing_file_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[data]\nlosses = "nowhere.csv"\ncpi = "cpi.csv"\n')
    assert run(["--config", cfg, "diagnose", "--out", tmp_path / "o"]) == 2
    err = capsys.readouterr().err
    assert "nowhere.csv" in err
    assert not (tmp_path / "o").exists()


def test_missing_config_exit_2(tmp_path):
    assert run(["--config", tmp_path / "none.toml", "rank"]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[evt]\nthreshhold = 3\n")
    with pytest.raises(ConfigError):
        PipelineConfig.load(cfg)


def test_fit_requires_seed(tmp_path, capsys):
    assert run(["fit", "--out", tmp_path]) == 2
    assert "seed" in capsys.readouterr().err
    assert not any(tmp_path.iterdir())


def test_fit_document(tmp_path):
    assert run(["fit", "--seed", 1, "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["schema_version"] and doc["command"] == "fit" and doc["seed"] == 1
    assert set(doc["fits"]) == {"pp", "gpd", "exponential"}
    assert doc["fits"]["gpd"]["aic"] == pytest.approx(226.76, abs=0.5)
    assert doc["reference_consistency"]


def test_risk_document(tmp_path):
    assert run(["risk", "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "risk_report.json").read_text())
    quantities = {e["quantity"] for e in doc["reference_consistency"]}
    for q in (0.85, 0.9, 0.95, 0.975, 0.99):
        assert f"var@{q}" in quantities and f"cvar@{q}" in quantities
    for e in doc["reference_consistency"]:
        assert {"published", "computed", "rel_deviation"} <= set(e)
    assert [l["taker"] for l in doc["layers"]] == ["Insurer", "CRFCIF", "Reinsurance", "CatBond"]


def test_risk_model_flag_and_bad_model(tmp_path):
    assert run(["risk", "--model", "gpd", "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "risk_report.json").read_text())
    assert doc["basis"]["model"] == "gpd" and doc["basis"]["gev"] is None
    cfg = tmp_path / "c.toml"
    cfg.write_text('[risk]\nmodel = "weibull"\n')
    assert run(["--config", cfg, "risk", "--out", tmp_path / "x"]) == 2


def test_rank_table(tmp_path):
    assert run(["rank", "--method", "gra", "--weights", "equal", "--out", tmp_path]) == 0
    rows = read_csv(tmp_path / "rank_gra_equal.csv")
    assert list(rows[0]) == ["province", "score", "rank", "tier"]
    assert rows[0]["province"] == "Jiangxi" and rows[0]["tier"] == "A"
    assert len(rows) == 19
    doc = json.loads((tmp_path / "rank_comparison.json").read_text())
    assert set(doc["rankings"]) >= {"gra_equal", "gra_entropy", "topsis_entropy"}


def test_rank_topsis_equal_and_json_format(tmp_path):
    assert run(["--format", "json", "rank", "--method", "topsis", "--weights", "equal",
                "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "rank_topsis_equal.json").read_text())
    assert doc["columns"] == ["province", "score", "rank", "tier"]


def test_rank_bad_breaks(tmp_path):
    assert run(["rank", "--breaks", "14", "4", "--out", tmp_path]) == 2
    assert not any(tmp_path.iterdir())


def test_price_reproducible_and_worker_invariant(tmp_path):
    for name, extra in (("a", []), ("b", []), ("c", ["--workers", "3"])):
        assert run(["price", "--seed", 5, "--out", tmp_path / name, *FAST, *extra]) == 0
    a = (tmp_path / "a" / "price.json").read_bytes()
    assert a == (tmp_path / "b" / "price.json").read_bytes()
    assert a == (tmp_path / "c" / "price.json").read_bytes()
    doc = json.loads(a)
    assert doc["seed"] == 5 and doc["n_paths"] == 4000
    assert doc["result"]["spread"] == 0.05
    assert "workers" not in doc["config"]


def test_seed_flag_before_or_after_command(tmp_path):
    assert run(["--seed", 5, "price", "--out", tmp_path / "a", *FAST]) == 0
    assert run(["price", "--seed", 5, "--out", tmp_path / "b", *FAST]) == 0
    assert (tmp_path / "a" / "price.json").read_bytes() == (tmp_path / "b" / "price.json").read_bytes()


def test_calibrate_bracket_failure_is_model_error(tmp_path, capsys):
    code = run(["calibrate", "--seed", 1, "--out", tmp_path, *FAST, "--target", "5000"])
    assert code == 1
    assert "straddle" in capsys.readouterr().err


def test_calibrate_success(tmp_path):
    assert run(["calibrate", "--seed", 1, "--out", tmp_path, *FAST, "--target", "400"]) == 0
    doc = json.loads((tmp_path / "calibrate.json").read_text())
    assert doc["result"]["converged"] and doc["n_paths"] == 4000


def test_sweep_outputs(tmp_path):
    assert run(["sweep", "--seed", 2, "--out", tmp_path, *FAST, "--parameter", "kappa",
                "--grid", "0", "0.5", "1.0"]) == 0
    rows = read_csv(tmp_path / "sweep_kappa.csv")
    assert [float(r["value"]) for r in rows] == [0.0, 0.5, 1.0]
    prices = [float(r["price"]) for r in rows]
    assert prices[0] > prices[1] > prices[2]
    doc = json.loads((tmp_path / "sweep_kappa.json").read_text())
    assert doc["seed"] == 2 and doc["n_paths"] == 4000


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        f'[data]\nindicators = "{bundled_path("indicators.csv")}"\n'
        '[mcdm]\nmethod = "topsis"\nweights = "entropy"\n'
        '[run]\nseed = 3\n'
    )
    c = PipelineConfig.load(cfg)
    assert c["mcdm"]["method"] == "topsis" and c["run"]["seed"] == 3
    assert c["mcdm"]["zeta"] == 0.5  # built-in default
    assert run(["--config", cfg, "rank", "--method", "gra", "--out", tmp_path / "o"]) == 0
    assert (tmp_path / "o" / "rank_gra_entropy.csv").is_file()


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "ind.csv").write_bytes(bundled_path("indicators.csv").read_bytes())
    cfg = tmp_path / "sub" / "c.toml"
    cfg.write_text('[data]\nindicators = "ind.csv"\n')
    assert run(["--config", cfg, "rank", "--out", tmp_path / "o"]) == 0


def test_bad_csv_row_exit_2(tmp_path, capsys):
    bad = tmp_path / "ind.csv"
    text = bundled_path("indicators.csv").read_text().splitlines()
    text[3] = text[3].replace(",", ",x", 1)
    bad.write_text("\n".join(text) + "\n")
    cfg = tmp_path / "c.toml"
    cfg.write_text('[data]\nindicators = "ind.csv"\n')
    assert run(["--config", cfg, "rank", "--out", tmp_path / "o"]) == 2
    assert "line 4" in capsys.readouterr().err
