import json
import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradualft import Dataset, Domain, LrSchedule, Schedule, StageHyper, TaskSpec, gen_task
from gradualft.harness import (ConfigError, DatasetFormatError, ExperimentConfig, config_from_dict,
                               emit_stage_curve, load_config, load_dataset, load_reports, regenerate_report,
                               run_experiment, save_config, save_dataset)
from gradualft.harness.cli import main, parse_seeds
from gradualft.harness.experiment import run_one

from conftest import make_dataset

SMALL_TASK = dict(in_train_n=30, in_dev_n=80, in_test_n=200, out_pool_n=300)


def small_cfg(tmp_path=None, **kw):
    base = dict(task=dict(SMALL_TASK), schedule=Schedule((300, 150, 40, 0)),
                stage_hyper=StageHyper(batch_size=32, max_epochs=30, patience=3), seeds=(0, 1, 2))
    base.update(kw)
    if tmp_path is not None:
        base["output_dir"] = str(tmp_path)
    return ExperimentConfig(**base)


# -- dataset files ---------------------------------------------------------

def test_dataset_round_trip(tmp_path):
    d = make_dataset(25, feature_dim=4, num_classes=5)
    d = Dataset(d.X * 1e-7 + 1 / 3, d.y, np.arange(25) % 2, 4, 5, source=[None, "ar"] * 12 + ["en"])
    save_dataset(d, tmp_path / "d.tsv")
    assert load_dataset(tmp_path / "d.tsv").identical_to(d)


@given(st.lists(st.tuples(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=2, max_size=2),
                          st.integers(0, 2), st.booleans()), max_size=12))
def test_dataset_round_trip_property(tmp_path_factory, recs):
    path = tmp_path_factory.mktemp("rt") / "d.tsv"
    if recs:
        X = np.array([r[0] for r in recs])
        d = Dataset(X, [r[1] for r in recs], [int(r[2]) for r in recs], 2, 3)
    else:
        d = Dataset.empty(2, 3)
    save_dataset(d, path)
    assert load_dataset(path).identical_to(d)


def test_dataset_header_only_is_empty(tmp_path):
    p = tmp_path / "e.tsv"
    p.write_text("#gradualft-dataset format_version=1 feature_dim=3 num_classes=2\n")
    d = load_dataset(p)
    assert len(d) == 0 and d.feature_dim == 3 and d.num_classes == 2


@pytest.mark.parametrize("line, what", [
    ("in\t0\t\t1.0", "fields"),
    ("in\t0\t\t1.0\tabc", "abc"),
    ("sideways\t0\t\t1.0\t2.0", "sideways"),
    ("in\t2\t\t1.0\t2.0", "label 2"),
    ("in\t0\t\tnan\t2.0", "non-finite"),
])
def test_dataset_malformed_line_named(tmp_path, line, what):
    p = tmp_path / "bad.tsv"
    p.write_text("#gradualft-dataset format_version=1 feature_dim=2 num_classes=2\n"
                 "out\t1\t\t0.5\t0.5\n" + line + "\n")
    with pytest.raises(DatasetFormatError) as e:
        load_dataset(p)
    assert e.value.lineno == 3 and what in str(e.value)


@pytest.mark.parametrize("header", ["", "in\t0\t\t1.0", "#gradualft-dataset format_version=2 feature_dim=1 num_classes=2"])
def test_dataset_bad_header(tmp_path, header):
    p = tmp_path / "h.tsv"
    p.write_text(header + "\n" if header else "")
    with pytest.raises(DatasetFormatError):
        load_dataset(p)


# -- config ----------------------------------------------------------------

def test_config_round_trip(tmp_path):
    cfg = small_cfg(tmp_path, lr_schedule=LrSchedule.geometric(0.2, 0.5), regimes=("gradual",))
    save_config(cfg, tmp_path / "c.json")
    assert load_config(tmp_path / "c.json") == cfg


def test_config_defaults():
    cfg = config_from_dict({"format_version": 1})
    assert cfg.schedule.amounts == (4000, 2000, 500, 0)
    assert cfg.lr_schedule.rates == (0.1, 0.1, 0.1, 0.04)
    assert cfg.seeds == tuple(range(10))


def test_config_schedule_as_string():
    assert config_from_dict({"format_version": 1, "schedule": "2000,500,0",
                             "lr_schedule": {"rates": [0.1, 0.1, 0.04]}}).schedule.amounts == (2000, 500, 0)


@pytest.mark.parametrize("doc", [
    {"format_version": 1, "seed": [1]},
    {"format_version": 1, "task": {"in_train": 5}},
    {"format_version": 1, "stage_hyper": {"lr": 0.1}},
    {"format_version": 1, "model_spec": {"hidden": 3}},
    {"format_version": 1, "lr_schedule": {"rates": [0.1], "decay": 0.5, "x": 1}},
    {"format_version": 2},
    {},
    {"format_version": 1, "regimes": []},
    {"format_version": 1, "regimes": ["gradual", "fancy"]},
    {"format_version": 1, "seeds": []},
    {"format_version": 1, "seeds": [1, 1]},
    {"format_version": 1, "seeds": [-1]},
    {"format_version": 1, "schedule": [500, 500]},
    {"format_version": 1, "task": {"out_pool_n": 100}},
    {"format_version": 1, "lr_schedule": {"rates": [0.1, 0.1]}},
    {"format_version": 1, "stage_hyper": {"patience": 0}},
    {"format_version": 1, "task": 3},
])
def test_config_rejects(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_config_invalid_json(tmp_path):
    (tmp_path / "c.json").write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "c.json")


def test_task_seed_follows_experiment_seed_unless_fixed():
    assert small_cfg().task_spec(7).seed == 7
    assert small_cfg(task={**SMALL_TASK, "seed": 3}).task_spec(7).seed == 3


# -- experiment ------------------------------------------------------------

def test_single_regime_single_seed():
    res = run_experiment(small_cfg(regimes=("no_ft_single",), seeds=(4,)))
    assert len(res.reports) == 1 and res.ok
    assert res.reports[0].schedule.amounts == (0,) and res.reports[0].seed == 4


def test_experiment_outputs_and_determinism(tmp_path):
    a = run_experiment(small_cfg(tmp_path / "a"))
    run_experiment(small_cfg(tmp_path / "b"), jobs=2)
    names = sorted(p.relative_to(tmp_path / "a").as_posix() for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert "summary.json" in names and "stage_curve.csv" in names and "runs/gradual-seed2.json" in names
    assert len([n for n in names if n.startswith("runs/")]) == 12
    for n in names:
        if n in ("timings.json", "config.json"):
            continue
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes(), n
    assert a.ok and [r.regime for r in a.reports[:3]] == ["no_ft_single"] * 3


def test_summary_recomputable_from_reports(tmp_path):
    run_experiment(small_cfg(tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    for row in summary["regimes"]:
        accs = [json.loads(p.read_text())["final_test"]["accuracy"]
                for p in sorted((tmp_path / "runs").glob(f"{row['regime']}-seed*.json"))]
        assert row["mean_test_accuracy"] == statistics.fmean(accs)
        assert row["std_test_accuracy"] == statistics.stdev(accs)
        assert row["n_ok"] == len(accs)


def test_report_regeneration_matches(tmp_path):
    run_experiment(small_cfg(tmp_path))
    before = {n: (tmp_path / n).read_bytes() for n in ("summary.json", "summary.csv", "summary.txt", "stage_curve.csv")}
    regenerate_report(tmp_path, tmp_path / "again")
    for n, b in before.items():
        assert (tmp_path / "again" / n).read_bytes() == b


def test_stage_curve_shape():
    res = run_experiment(small_cfg(regimes=("one_stage", "gradual"), seeds=(0, 1)))
    g = [r for r in res.reports if r.regime == "gradual"]
    o = [r for r in res.reports if r.regime == "one_stage"]
    assert len(emit_stage_curve(g).strip().splitlines()) == 1 + 4
    assert len(emit_stage_curve(o).strip().splitlines()) == 1 + 2
    rows = [line.split(",") for line in emit_stage_curve(res.reports).strip().splitlines()]
    assert rows[0] == ["stage", "one_stage", "gradual"]
    assert rows[3][1] == "" and float(rows[3][2]) == statistics.fmean(r.stages[2].dev.accuracy for r in g)
    with pytest.raises(ValueError):
        emit_stage_curve([])


def write_task_dir(root, pool_n):
    root.mkdir()
    for name, d in zip(("train", "dev", "test", "pool"), gen_task(TaskSpec(**{**SMALL_TASK, "out_pool_n": pool_n}))):
        save_dataset(d, root / f"{name}.tsv")


def test_failed_runs_excluded(tmp_path):
    # the pool on disk is smaller than the schedule's first stage
    write_task_dir(tmp_path / "data", 100)
    cfg = small_cfg(tmp_path / "out", task=str(tmp_path / "data"), seeds=(0, 1))
    res = run_experiment(cfg)
    assert not res.ok
    assert {(f.regime, f.seed) for f in res.failures} == {(r, s) for r in ("no_ft_mixed", "one_stage", "gradual")
                                                          for s in (0, 1)}
    rows = {r["regime"]: r for r in res.summary["regimes"]}
    assert rows["gradual"]["n_ok"] == 0 and rows["gradual"]["mean_test_accuracy"] is None
    assert rows["no_ft_single"]["n_ok"] == 2 and rows["no_ft_single"]["n_failed"] == 0
    assert len(res.summary["failed_runs"]) == 6
    reloaded = load_reports(tmp_path / "out")
    assert reloaded.summary == res.summary
    assert "FAILED gradual seed 0" in (tmp_path / "out" / "summary.txt").read_text()


def test_divergence_recorded_not_raised():
    res = run_experiment(small_cfg(regimes=("no_ft_single",), seeds=(0,),
                                   lr_schedule=LrSchedule.explicit([1e6] * 4)))
    assert not res.ok and "TrainingDivergence" in res.failures[0].error


def test_data_directory_task_matches_synthetic(tmp_path):
    write_task_dir(tmp_path / "data", 300)
    cfg_file = small_cfg(task=str(tmp_path / "data"))
    cfg_syn = small_cfg(task={**SMALL_TASK, "seed": 0})
    assert run_one(cfg_file, "gradual", 1).to_dict() == run_one(cfg_syn, "gradual", 1).to_dict()


# -- command line ----------------------------------------------------------

def test_parse_seeds():
    assert parse_seeds("0-3,7") == [0, 1, 2, 3, 7]
    assert parse_seeds("5") == [5]
    for bad in ("", "a", "3-1", "1,1", "-2"):
        with pytest.raises(Exception):
            parse_seeds(bad)


def test_cli_gen_run_report(tmp_path, capsys):
    cfg = small_cfg(seeds=(0, 1))
    save_config(cfg, tmp_path / "cfg.json")
    assert main(["gen", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "data"), "--seeds", "5"]) == 0
    assert load_dataset(tmp_path / "data" / "pool.tsv").identical_to(gen_task(cfg.task_spec(5))[3])
    assert main(["gen", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "many")]) == 0
    assert (tmp_path / "many" / "seed1" / "train.tsv").exists()

    assert main(["run", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "res"),
                 "--seeds", "2,3", "--jobs", "2"]) == 0
    out = capsys.readouterr().out
    assert "gradual" in out and "one_stage" in out
    assert sorted(p.name for p in (tmp_path / "res" / "runs").glob("gradual-*")) == [
        "gradual-seed2.json", "gradual-seed3.json"]
    (tmp_path / "res" / "summary.txt").unlink()
    assert main(["report", "--out", str(tmp_path / "res")]) == 0
    assert (tmp_path / "res" / "summary.txt").exists()


def test_cli_run_exit_code_on_failure(tmp_path):
    cfg = small_cfg(regimes=("no_ft_single",), seeds=(0,), lr_schedule=LrSchedule.explicit([1e6] * 4))
    save_config(cfg, tmp_path / "cfg.json")
    assert main(["run", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "o")]) == 1


def test_cli_bad_config(tmp_path, capsys):
    (tmp_path / "cfg.json").write_text('{"format_version": 1, "sedes": [1]}')
    assert main(["run", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "o")]) == 2
    assert "sedes" in capsys.readouterr().err


def test_cli_gradcheck(capsys):
    assert main(["gradcheck"]) == 0
    assert capsys.readouterr().out.count(" ok") == 10


def test_cli_jobs_validated(tmp_path):
    assert main(["run", "--out", str(tmp_path), "--jobs", "0"]) == 2
