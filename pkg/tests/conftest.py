import numpy as np
import pytest
from hypothesis import settings

from gradualft import Dataset, Domain, Rng

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_dataset(n, feature_dim=3, num_classes=3, seed=0, domain=Domain.IN, source=None):
    rng = Rng(seed).child("fixture")
    X = rng.normal((n, feature_dim))
    y = rng.integers(0, num_classes, size=n) if n else np.zeros(0, dtype=int)
    return Dataset(X, y, np.full(n, int(domain)), feature_dim, num_classes, source=source)


def tagged_pool(n, feature_dim=2, num_classes=2):
    """Pool whose first feature is the example's original index, so subsets are traceable."""
    X = np.zeros((n, feature_dim))
    X[:, 0] = np.arange(n)
    return Dataset(X, np.arange(n) % num_classes, np.full(n, int(Domain.OUT)), feature_dim, num_classes)


@pytest.fixture
def small_task():
    from gradualft import TaskSpec, gen_task
    return gen_task(TaskSpec(in_train_n=30, in_dev_n=60, in_test_n=100, out_pool_n=200, seed=3))
