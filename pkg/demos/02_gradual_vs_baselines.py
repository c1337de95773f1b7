"""
Gradual fine-tuning against its baselines
=========================================

All four regimes are the same loop with different out-of-domain schedules:

    no_ft_single  [0]
    no_ft_mixed   [4000]
    one_stage     [4000, 0]
    gradual       [4000, 2000, 500, 0]

Run over a handful of seeds and print the summary table and the per-stage
dev accuracy that a plot of the stage curve would use.
"""

import sys
import tempfile

from gradualft.harness import ExperimentConfig, run_experiment
from gradualft.harness.experiment import emit_stage_curve, summary_text

seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 5)
out = tempfile.mkdtemp(prefix="gradualft-")
cfg = ExperimentConfig(seeds=tuple(seeds), output_dir=out)

result = run_experiment(cfg)
print(summary_text(result.summary))

# mean dev accuracy after each stage, one column per regime
print(emit_stage_curve(result.reports))

# paired comparison, seed by seed
gradual = {r.seed: r.final_test.accuracy for r in result.reports if r.regime == "gradual"}
one = {r.seed: r.final_test.accuracy for r in result.reports if r.regime == "one_stage"}
for s in sorted(gradual):
    print(f"seed {s}: gradual - one_stage = {100 * (gradual[s] - one[s]):+.2f} pts")
print(f"\nreports written to {out}")
