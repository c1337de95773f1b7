"""Command line entry point.

    gradualft gen --config cfg.json --out data/ [--seeds 3]
    gradualft run --config cfg.json --out results/ [--seeds 0,1,2] [--jobs 4]
    gradualft report --out results/
    gradualft gradcheck [--seeds 0-9]

Exit status is 0 only when every run (or every gradient check) succeeds.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .. import gradcheck
from ..synthgen import TaskSpec, gen_task
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import regenerate_report, run_experiment, summary_text
from .formats import save_dataset

log = logging.getLogger("gradualft")


def parse_seeds(text: str) -> list[int]:
    """``"0,1,5"``, ``"0-9"`` or a mix such as ``"0-3,7"``."""
    seeds = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        lo, sep, hi = tok.partition("-")
        if not lo.isdigit() or (sep and not hi.isdigit()):
            raise argparse.ArgumentTypeError(f"bad seed token {tok!r}")
        if sep:
            if int(hi) < int(lo):
                raise argparse.ArgumentTypeError(f"empty seed range {tok!r}")
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(lo))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    if len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError("seeds must not repeat")
    return seeds


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(seeds=args.seeds, output_dir=getattr(args, "out", None))


def cmd_gen(args) -> int:
    cfg = _load(args)
    if not cfg.synthetic:
        raise ConfigError("gen needs a synthetic task in the config")
    out = Path(args.out)
    # one seed writes straight into --out, several get a subdirectory each
    for seed in cfg.seeds:
        spec: TaskSpec = cfg.task_spec(seed)
        dest = out if len(cfg.seeds) == 1 else out / f"seed{seed}"
        dest.mkdir(parents=True, exist_ok=True)
        for name, d in zip(("train", "dev", "test", "pool"), gen_task(spec)):
            save_dataset(d, dest / f"{name}.tsv")
        print(f"wrote task seed {spec.seed} to {dest}")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg, jobs=args.jobs)
    print(summary_text(result.summary), end="")
    return 0 if result.ok else 1


def cmd_report(args) -> int:
    result = regenerate_report(args.out)
    print(summary_text(result.summary), end="")
    return 0 if result.ok else 1


def cmd_gradcheck(args) -> int:
    results = gradcheck.run_suite(args.seeds or range(10))
    for r in results:
        s = r.spec
        print(f"seed {r.seed:3d}  dim {s.feature_dim} K {s.num_classes} hidden {s.hidden_dim} "
              f"batch {r.batch_size}  max rel err {r.max_rel_error:.2e}  "
              f"{'ok' if r.ok else 'FAIL'}")
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradualft", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_out=True):
        sp.add_argument("--config", help="experiment config (JSON); defaults apply when omitted")
        sp.add_argument("--out", required=need_out, help="output directory")
        sp.add_argument("--seeds", type=parse_seeds, help="override the config's seeds")

    sp = sub.add_parser("gen", help="write a synthetic task to disk")
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("run", help="run the regime x seed matrix")
    common(sp)
    sp.add_argument("--jobs", type=int, default=1, help="parallel runs")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("report", help="rebuild summaries from persisted run reports")
    sp.add_argument("--out", required=True, help="experiment output directory")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    sp.add_argument("--seeds", type=parse_seeds)
    sp.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
