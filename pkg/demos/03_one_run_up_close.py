"""
One gradual run, stage by stage
===============================

Calls the loop directly instead of going through the harness, then looks at
what each stage trained on and how early stopping behaved.
"""

import numpy as np

from gradualft import LrSchedule, Rng, Schedule, StageHyper, TaskSpec, gen_task, gradual_ft, init
from gradualft.model import ModelSpec

train, dev, test, pool = gen_task(TaskSpec(seed=1))
m0 = init(ModelSpec(10, 4, hidden_dim=16), Rng(1).child("init"))

s = Schedule((4000, 2000, 500, 0))
rates = LrSchedule.explicit([0.1, 0.1, 0.1, 0.04])  # smaller step for the last stage
h = StageHyper(batch_size=32, patience=10)

model, report = gradual_ft(train, pool, m0, s, rates, h, dev, test, Rng(1).child("run"))

for st in report.stages:
    tr = st.trace
    print(f"stage {st.stage_index}: |T| = {st.train_size:4d}  lr {st.learning_rate:.2f}  "
          f"epochs {tr.n_epochs:3d} (best {tr.best_epoch:3d}, {tr.stopped_reason})  "
          f"dev {st.dev.accuracy:.3f}  test {st.test.accuracy:.3f}")

# each stage's pool is a subset of the previous one
for t in range(1, len(s)):
    inside = np.isin(report.stage_pools[t], report.stage_pools[t - 1]).all()
    print(f"O_{t} within O_{t - 1}: {inside}")

# per-class accuracy shows where the skewed pool pulls the model
print("final per-class test accuracy:", [round(a, 3) for a in report.final_test.per_class_accuracy])
