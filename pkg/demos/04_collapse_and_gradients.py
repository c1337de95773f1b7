"""
Two safety nets: divergence detection and gradient checking
===========================================================
"""

from gradualft import LrSchedule, Rng, Schedule, StageHyper, TaskSpec, TrainingDivergence, gen_task, gradual_ft, init
from gradualft.gradcheck import run_suite
from gradualft.model import ModelSpec

# an absurd learning rate blows the loss up within the first epoch; the
# trainer raises instead of handing a wrecked model to the next stage
train, dev, test, pool = gen_task(TaskSpec())
m0 = init(ModelSpec(10, 4, 16), Rng(0))
try:
    gradual_ft(train, pool, m0, Schedule((4000, 0)), LrSchedule.explicit([1e6, 1e6]),
               StageHyper(), dev, test, Rng(0))
except TrainingDivergence as e:
    print(f"diverged at epoch {e.epoch}, batch {e.batch}: {e}")

# analytic gradients against central differences on random small networks
for r in run_suite(range(10)):
    print(f"seed {r.seed}: hidden {r.spec.hidden_dim}  max rel err {r.max_rel_error:.1e}")
