"""
A look at the synthetic domain-shift task
=========================================

Four Gaussian blobs in ten dimensions.  The in-domain training set is tiny
(40 points); the out-of-domain pool is large (4000) but rotated, shifted
and skewed towards class 0.
"""

import numpy as np

from gradualft import TaskSpec, gen_task
from gradualft.synthgen import bayes_ceiling, class_means, out_domain_means, out_priors

spec = TaskSpec()
train, dev, test, pool = gen_task(spec)
print(f"train {len(train)}  dev {len(dev)}  test {len(test)}  pool {len(pool)}")

# class balance: uniform in-domain, skewed in the pool
print("in-domain class counts ", np.bincount(train.y, minlength=4))
print("pool class counts      ", np.bincount(pool.y, minlength=4))
print("pool priors            ", np.round(out_priors(spec), 3))

# how far each out-of-domain blob moved
drift = np.linalg.norm(out_domain_means(spec) - class_means(spec), axis=1)
print("mean displacement per class (sigma units):", np.round(drift / spec.noise_sigma, 2))

# nearest-mean is Bayes-optimal in-domain; nothing trained here can beat it
print(f"Bayes ceiling (Monte Carlo): {bayes_ceiling(spec):.4f}")
