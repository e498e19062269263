import csv
import json
import os

import pytest

from flexbeam import cli, harness
from flexbeam.harness import ConfigError, ExperimentConfig, SweepResult


def small(**kw):
    base = dict(
        num_users=2, num_clutters=1, antenna_counts=[2], region_lambda=4.0, sweep_var="power_dbm",
        sweep_values=[20.0, 30.0], num_seeds=2, outer_max_iters=20,
    )
    base.update(kw)
    return ExperimentConfig.from_dict(base)


@pytest.mark.parametrize("dbm, watts", [(30, 1.0), (10, 0.01), (40, 10.0)])
def test_dbm_to_watts(dbm, watts):
    assert harness.dbm_to_watts(dbm) == pytest.approx(watts, rel=1e-12)


@pytest.mark.parametrize("bad", [
    dict(sweep_var="noise"),
    dict(sweep_values=[]),
    dict(sweep_values=[30.0, 20.0]),
    dict(num_seeds=0),
    dict(algorithms=["nope"]),
    dict(sweep_var="comm_weight", sweep_values=[0.5, 1.5]),
    dict(antenna_counts=[0]),
    dict(region_lambda=0.5, antenna_counts=[4]),
    dict(unknown_key=1),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        small(**bad)


def test_config_round_trip():
    cfg = small()
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_figure_defaults():
    assert harness.figure_defaults("region_lambda").sweep_values == tuple(float(v) for v in range(6, 22))
    assert len(harness.figure_defaults("comm_weight").sweep_values) == 11
    with pytest.raises(ConfigError):
        harness.figure_defaults("bogus")


def test_empty_result_writes_headers(tmp_path):
    files = harness.emit(SweepResult(small(), [], [], []), str(tmp_path))
    with open(files["records"]) as fh:
        assert fh.read().strip() == ",".join(harness.RECORD_FIELDS)
    with open(files["aggregates"]) as fh:
        assert fh.read().strip() == ",".join(harness.AGGREGATE_FIELDS)


def test_single_seed_aggregate_has_zero_se():
    res = harness.run_sweep(small(num_seeds=1, sweep_values=[30.0]))
    assert all(a.count == 1 and a.objective_se == 0.0 for a in res.aggregates)


def test_scenarios_are_paired_across_values_and_algorithms():
    res = harness.run_sweep(small())
    by_seed = {}
    for rec in res.records:
        by_seed.setdefault(rec.seed, set()).add(rec.scenario_hash)
    assert all(len(h) == 1 for h in by_seed.values())
    assert len({next(iter(h)) for h in by_seed.values()}) == 2


def test_rerun_is_byte_identical_and_readable(tmp_path):
    cfg = small()
    a = harness.emit(harness.run_sweep(cfg), str(tmp_path / "a"))
    b = harness.emit(harness.run_sweep(cfg), str(tmp_path / "b"))
    for key in a:
        with open(a[key], "rb") as fa, open(b[key], "rb") as fb:
            assert fa.read() == fb.read(), key
    recs = harness.read_records(a["records"])
    assert recs == harness.run_sweep(cfg).records


def test_relative_gains_per_value():
    res = harness.run_sweep(small())
    gains = harness.relative_gains(res)
    assert [g["sweep_value"] for g in gains] == [20.0, 30.0]


def test_cli_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"num_seeds": -1}))
    assert cli.main(["sweep-power", "--config", str(path)]) == 2
    path.write_text("{not json")
    assert cli.main(["sweep-power", "--config", str(path)]) == 2


def test_cli_print_config_uses_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("FLEXBEAM_SEED", "17")
    assert cli.main(["sweep-region", "--print-config", "--seeds", "3"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["master_seed"] == 17 and cfg["num_seeds"] == 3 and cfg["sweep_var"] == "region_lambda"
    assert cli.main(["sweep-region", "--print-config", "--seed", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["master_seed"] == 5


def test_cli_rejects_bad_env_seed(monkeypatch):
    monkeypatch.setenv("FLEXBEAM_SEED", "abc")
    assert cli.main(["run", "--print-config"]) == 2


def test_cli_run_prints_json(capsys):
    assert cli.main(["run", "--antennas", "2", "--region-lambda", "3", "--algorithm", "BF-FPA"]) == 0
    line = json.loads(capsys.readouterr().out.strip())
    assert line["algorithm"] == "BF-FPA" and line["positions_lambda"] == [0.0, 0.5]


def test_cli_sweep_writes_outputs(tmp_path, capsys):
    path = tmp_path / "c.json"
    cfg = small(out=str(tmp_path / "out"), sweep_var="comm_weight", sweep_values=[0.0, 1.0]).to_dict()
    path.write_text(json.dumps(cfg))
    assert cli.main(["sweep-tradeoff", "--config", str(path)]) == 0
    out = tmp_path / "out"
    assert {"records.csv", "aggregates.csv", "failures.csv", "manifest.json", "comm_weight_objective.dat"} <= set(os.listdir(out))
    with open(out / "records.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 2 * 2 * 3
    with open(out / "failures.csv") as fh:
        assert fh.read().strip() == "seed,sweep_value,algorithm,n_antennas,error"
