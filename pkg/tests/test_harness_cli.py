import csv
import io
import json
import math

import pytest

from condtest.cli import main, parse_int, parse_int_list
from condtest.errors import CondError
from condtest.harness import (ExperimentConfig, read_trials_csv, run_estimate_experiment,
                              succeeded, summarize, summary_path, trial_seed, wilson_interval)


def small_cfg(**kw):
    base = dict(n=[2**12], support=[2**5, 2**12], eps=0.3, trials=3, master_seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_parse_int():
    assert parse_int("2^20") == 2**20
    assert parse_int("2**4") == 16
    assert parse_int(" 12 ") == 12
    assert parse_int_list("2^4,32, 64") == [16, 32, 64]


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(10, 10)
    assert hi == pytest.approx(1.0) and lo > 0.69


def test_success_predicate():
    assert succeeded(100, 130, 1.3) and succeeded(100, 100 / 1.3, 1.3)
    assert not succeeded(100, 131, 1.3)


def test_trial_seed_depends_on_indices_only():
    assert trial_seed(1, 0, 0) == trial_seed(1, 0, 0)
    assert len({trial_seed(1, g, t) for g in range(3) for t in range(3)}) == 9


def test_config_validation():
    for bad in (dict(n=[]), dict(support=[2**13]), dict(trials=-1), dict(eps=0.5),
                dict(tau="0"), dict(threads=0)):
        with pytest.raises(CondError):
            small_cfg(**bad).validate()


def test_experiment_writes_csv_and_summary(tmp_path):
    out = tmp_path / "run.csv"
    rep = run_estimate_experiment(small_cfg(out=str(out)))
    rows = read_trials_csv(out)
    assert len(rows) == 6
    assert list(rows[0]) == ["grid_index", "trial_index", "derived_seed", "n", "true_support",
                             "estimate", "success", "queries_used", "path"]
    summ = json.loads(open(summary_path(str(out))).read())
    assert summ["rng_algorithm"] == "numpy.PCG64"
    assert summ["config"]["constants"]["c_cmp"] == 16
    assert summ["kernel_backend"] in ("cython", "python")
    # the summary is recomputable from the rows
    for row in summ["summary"]:
        mine = [r for r in rows if int(r["grid_index"]) == row["grid_index"]]
        assert row["successes"] == sum(int(r["success"]) for r in mine)
        assert row["mean_queries"] == pytest.approx(
            sum(int(r["queries_used"]) for r in mine) / len(mine))
    for r in rows:
        assert int(r["success"]) == succeeded(int(r["true_support"]), float(r["estimate"]), 1.3)
    assert rep.summary == summ["summary"]


def test_determinism_across_runs_and_workers(tmp_path):
    a, b, c = (tmp_path / f"{x}.csv" for x in "abc")
    run_estimate_experiment(small_cfg(out=str(a)))
    run_estimate_experiment(small_cfg(out=str(b)))
    run_estimate_experiment(small_cfg(out=str(c), threads=2))
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_zero_trials_is_empty(tmp_path):
    rep = run_estimate_experiment(small_cfg(trials=0))
    assert rep.records == []
    assert all(row["trials"] == 0 for row in rep.summary)


def test_timing_column_only_on_request():
    rep = run_estimate_experiment(small_cfg(trials=1, support=[2**5], timing=True))
    header = rep.csv_text().splitlines()[0].split(",")
    assert header[-1] == "wall_time_ms"
    assert "wall_time_ms" not in json.loads(run_estimate_experiment(
        small_cfg(trials=1, support=[2**5])).json_text())["records"][0]


def test_constant_override_reaches_trials():
    base = run_estimate_experiment(small_cfg(trials=1, support=[2**5]))
    cheap = run_estimate_experiment(small_cfg(trials=1, support=[2**5], constants={"c_cmp": 4}))
    assert cheap.records[0].queries_used < base.records[0].queries_used


def test_nonadaptive_experiment():
    rep = run_estimate_experiment(small_cfg(nonadaptive=True, trials=2, support=[2**8]))
    assert all(r.path == "NonAdaptive" for r in rep.records)
    assert rep.metadata()["calibrated_constants"] == ["c_na", "theta_na"]
    assert rep.config.factor == 4.0


def test_summarize_handles_empty_grid_points():
    cfg = small_cfg()
    rows = summarize(cfg, [])
    assert [r["success_fraction"] for r in rows] == [None, None]


# -- command line ----------------------------------------------------------------


def test_cli_estimate_stdout(capsys):
    assert main(["--seed", "3", "estimate", "--n", "2^12", "--support", "32", "--trials", "2"]) == 0
    out = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(out.split("{", 1)[0])))
    assert rows[0][0] == "grid_index" and len(rows) == 3


def test_cli_estimate_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["estimate", "--n", "4096", "--support", "4096", "--trials", "1",
                 "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["records"][0]["path"] == "DenseShortcut"


def test_cli_env_defaults(monkeypatch, capsys):
    monkeypatch.setenv("CONDTEST_TRIALS", "0")
    monkeypatch.setenv("CONDTEST_N", "2^12")
    assert main(["estimate", "--support", "8"]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("grid_index")


def test_cli_usage_errors(capsys):
    assert main(["check", "nope"]) == 2
    assert main(["estimate", "--n", "16", "--support", "32", "--trials", "1"]) == 2
    assert main(["check", "atoms", "--q", "3"]) == 2
    assert main([]) == 2


def test_cli_gen_instance(tmp_path, capsys):
    out = tmp_path / "i.json"
    assert main(["--seed", "4", "gen-instance", "--family", "equivalence", "--n", "2^16",
                 "--kind", "no", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["family"] == "equivalence" and d["kind"] == "no"
    assert main(["gen-instance", "--family", "support-pair", "--n", "2^16", "--kind", "yes"]) == 0
    assert json.loads(capsys.readouterr().out)["family"] == "support-pair"


def test_cli_check_exit_codes(capsys):
    assert main(["check", "atoms", "--count", "20"]) == 0
    assert "PASS atoms" in capsys.readouterr().out
    assert main(["check", "hitting", "--count", "2"]) == 1
    assert capsys.readouterr().out.startswith("FAIL hitting")
    assert main(["--format", "json", "check", "fact54", "--count", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["details"]["distributions"] == 5
    assert main(["check", "fact54", "--count", "5", "--format", "json", "--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "fact54"
