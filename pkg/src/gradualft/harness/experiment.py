"""Run the regime x seed comparison matrix and persist everything it produces.

Output directory layout::

    config.json          the resolved configuration
    runs/<regime>-seed<seed>.json
    summary.json         per-regime mean/stddev of final test accuracy
    summary.csv
    summary.txt
    stage_curve.csv      stage index x regime -> mean dev accuracy
    timings.json         wall-clock seconds per run (not reproducible by nature)

Everything except ``timings.json`` is a pure function of the config.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..gradual import REGIMES, RunReport, gradual_ft, regime_rates, regime_schedule
from ..model import init
from ..rng import Rng
from ..sampling import ScheduleInfeasible
from ..synthgen import gen_task
from ..trainer import TrainingDivergence
from .config import ExperimentConfig, save_config
from .formats import failure_to_json, load_dataset, read_report_file, report_from_doc, report_to_json

log = logging.getLogger(__name__)

SUMMARY_VERSION = 1


@dataclass
class RunFailure:
    regime: str
    seed: int
    error: str


@dataclass
class ExperimentResult:
    reports: list[RunReport]
    failures: list[RunFailure] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def load_task_data(cfg: ExperimentConfig, seed: int):
    """``(train, dev, test, pool)`` for one experiment seed."""
    if cfg.synthetic:
        return gen_task(cfg.task_spec(seed))
    root = Path(cfg.task)
    return tuple(load_dataset(root / f"{name}.tsv") for name in ("train", "dev", "test", "pool"))


def run_one(cfg: ExperimentConfig, regime: str, seed: int, data=None) -> RunReport:
    train, dev, test, pool = data if data is not None else load_task_data(cfg, seed)
    s = regime_schedule(regime, cfg.schedule[0], cfg.schedule)
    if s[0] > len(pool):
        raise ScheduleInfeasible(s[0], len(pool), stage=0)
    master = Rng(seed)
    m0 = init(cfg.model_spec.build(train.feature_dim, train.num_classes), master.child("init"))
    _, report = gradual_ft(
        train, pool, m0, s, regime_rates(cfg.lr_schedule, len(s)), cfg.stage_hyper,
        dev, test, master.child("run"), regime=regime,
    )
    # Rng.child keeps the master seed, so the report records the experiment seed
    return report


def _run_task(args):
    cfg, regime, seed = args
    try:
        return regime, seed, run_one(cfg, regime, seed), None
    except (TrainingDivergence, ScheduleInfeasible, ValueError, OSError) as e:
        return regime, seed, None, f"{type(e).__name__}: {e}"


def _run_name(regime: str, seed: int) -> str:
    return f"{regime}-seed{seed}"


def _order_key(regime: str, seed: int):
    return (REGIMES.index(regime), seed)


def summarize(reports: list[RunReport], failures: list[RunFailure] = ()) -> dict:
    """Per-regime statistics over successful runs; failed runs are only counted."""
    regimes = sorted({r.regime for r in reports} | {f.regime for f in failures}, key=REGIMES.index)
    rows = []
    for regime in regimes:
        runs = sorted((r for r in reports if r.regime == regime), key=lambda r: r.seed)
        test = [r.final_test.accuracy for r in runs]
        dev = [r.final_dev.accuracy for r in runs]
        rows.append({
            "regime": regime,
            "n_ok": len(runs),
            "n_failed": sum(f.regime == regime for f in failures),
            "mean_test_accuracy": statistics.fmean(test) if test else None,
            "std_test_accuracy": (statistics.stdev(test) if len(test) > 1 else 0.0) if test else None,
            "mean_dev_accuracy": statistics.fmean(dev) if dev else None,
            "test_accuracy_by_seed": {str(r.seed): r.final_test.accuracy for r in runs},
        })
    return {
        "format": "gradualft-summary",
        "format_version": SUMMARY_VERSION,
        "regimes": rows,
        "failed_runs": [
            {"regime": f.regime, "seed": f.seed, "error": f.error}
            for f in sorted(failures, key=lambda f: _order_key(f.regime, f.seed))
        ],
    }


def emit_stage_curve(reports: list[RunReport]) -> str:
    """CSV with one row per stage index and one column per regime (mean dev accuracy)."""
    if not reports:
        raise ValueError("no reports to summarize")
    regimes = sorted({r.regime for r in reports}, key=REGIMES.index)
    n_stages = max(len(r.stages) for r in reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage"] + regimes)
    for t in range(n_stages):
        row = [t]
        for regime in regimes:
            vals = [r.stages[t].dev.accuracy for r in reports
                    if r.regime == regime and t < len(r.stages)]
            row.append(repr(statistics.fmean(vals)) if vals else "")
        w.writerow(row)
    return buf.getvalue()


def summary_csv(summary: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["regime", "n_ok", "n_failed", "mean_test_accuracy", "std_test_accuracy",
                "mean_dev_accuracy"])
    for row in summary["regimes"]:
        w.writerow([row["regime"], row["n_ok"], row["n_failed"],
                    "" if row["mean_test_accuracy"] is None else repr(row["mean_test_accuracy"]),
                    "" if row["std_test_accuracy"] is None else repr(row["std_test_accuracy"]),
                    "" if row["mean_dev_accuracy"] is None else repr(row["mean_dev_accuracy"])])
    return buf.getvalue()


def summary_text(summary: dict) -> str:
    lines = [f"{'regime':<14}{'runs':>6}{'failed':>8}{'test acc (mean +- sd)':>26}{'dev acc':>10}"]
    for row in summary["regimes"]:
        if row["mean_test_accuracy"] is None:
            acc, dev = "-", "-"
        else:
            acc = f"{100 * row['mean_test_accuracy']:.2f} +- {100 * row['std_test_accuracy']:.2f}"
            dev = f"{100 * row['mean_dev_accuracy']:.2f}"
        lines.append(f"{row['regime']:<14}{row['n_ok']:>6}{row['n_failed']:>8}{acc:>26}{dev:>10}")
    for f in summary["failed_runs"]:
        lines.append(f"FAILED {f['regime']} seed {f['seed']}: {f['error']}")
    return "\n".join(lines) + "\n"


def write_outputs(out: Path, result: ExperimentResult) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(result.summary, indent=1) + "\n")
    (out / "summary.csv").write_text(summary_csv(result.summary))
    (out / "summary.txt").write_text(summary_text(result.summary))
    if result.reports:
        (out / "stage_curve.csv").write_text(emit_stage_curve(result.reports))


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run every (regime, seed) pair, persist reports and summaries, return the result.

    A run that diverges or hits an infeasible schedule is recorded as failed
    and excluded from the statistics; the remaining runs still execute.
    """
    tasks = [(cfg, regime, seed) for regime in cfg.regimes for seed in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    else:
        outcomes = [_run_task(t) for t in tasks]
    outcomes.sort(key=lambda o: _order_key(o[0], o[1]))

    reports, failures = [], []
    for regime, seed, report, error in outcomes:
        if report is None:
            log.warning("run %s failed: %s", _run_name(regime, seed), error)
            failures.append(RunFailure(regime, seed, error))
        else:
            reports.append(report)
    result = ExperimentResult(reports, failures, summarize(reports, failures))

    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        runs = out / "runs"
        runs.mkdir(parents=True, exist_ok=True)
        save_config(cfg, out / "config.json")
        for r in reports:
            (runs / f"{_run_name(r.regime, r.seed)}.json").write_text(report_to_json(r))
        for f in failures:
            (runs / f"{_run_name(f.regime, f.seed)}.json").write_text(
                failure_to_json(f.regime, f.seed, f.error))
        write_outputs(out, result)
        timings = {_run_name(r.regime, r.seed): r.wall_clock_seconds for r in reports}
        (out / "timings.json").write_text(json.dumps(timings, indent=1) + "\n")
    return result


def load_reports(out_dir) -> ExperimentResult:
    """Rebuild the result from the run files of a previous experiment."""
    reports, failures = [], []
    for path in sorted(Path(out_dir, "runs").glob("*.json")):
        doc = read_report_file(path)
        if doc["status"] == "ok":
            reports.append(report_from_doc(doc))
        else:
            failures.append(RunFailure(doc["regime"], int(doc["seed"]), doc["error"]))
    reports.sort(key=lambda r: _order_key(r.regime, r.seed))
    return ExperimentResult(reports, failures, summarize(reports, failures))


def regenerate_report(out_dir, dest: Optional[Path] = None) -> ExperimentResult:
    result = load_reports(out_dir)
    write_outputs(Path(dest or out_dir), result)
    return result
