from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradualft import Dataset, Domain, Rng, ScheduleInfeasible, SplitSpec, mix, sample, split
from gradualft.sampling import sample_indices

from conftest import make_dataset, tagged_pool


def rows(d):
    return Counter((tuple(x), int(y), int(t)) for x, y, t in zip(d.X.tolist(), d.y, d.domain))


def test_sample_half_of_pool():
    pool = tagged_pool(4000)
    s = sample(pool, 2000, Rng(1))
    assert len(s) == 2000
    assert not rows(s) - rows(pool)
    assert len(set(s.X[:, 0])) == 2000


def test_sample_everything_is_multiset_equal():
    pool = make_dataset(37)
    assert rows(sample(pool, 37, Rng(2))) == rows(pool)


def test_sample_zero_is_empty():
    s = sample(make_dataset(10, feature_dim=4, num_classes=5), 0, Rng(0))
    assert len(s) == 0 and s.feature_dim == 4 and s.num_classes == 5


def test_sample_too_many_names_stage():
    with pytest.raises(ScheduleInfeasible) as e:
        sample(make_dataset(5), 6, Rng(0), stage=2)
    assert e.value.stage == 2 and "stage 2" in str(e.value)


def test_sample_negative():
    with pytest.raises(ValueError):
        sample(make_dataset(5), -1, Rng(0))


@given(st.integers(0, 60), st.data(), st.integers(0, 2**32))
def test_sample_determinism_and_subset(n, data, seed):
    k = data.draw(st.integers(0, n))
    pool = tagged_pool(n)
    a, b = sample(pool, k, Rng(seed)), sample(pool, k, Rng(seed))
    assert a.identical_to(b)
    idx = a.X[:, 0]
    assert len(a) == k and len(set(idx)) == k and set(idx) <= set(range(n))


def test_inclusion_counts_chi_square():
    # counts are a sum of iid k-subset indicators whose covariance is
    # p(1-p) n/(n-1) times the centring projector, so the scaled statistic
    # is asymptotically chi-square with n-1 degrees of freedom
    n, k, trials = 12, 4, 3000
    counts = np.zeros(n)
    for s in range(trials):
        counts[sample_indices(n, k, Rng(s).child("chi"))] += 1
    p = k / n
    stat = ((counts - trials * p) ** 2).sum() / (trials * p * (1 - p) * n / (n - 1))
    assert abs(stat - (n - 1)) < 3 * np.sqrt(2 * (n - 1))


def test_mix_sizes_and_union():
    d = make_dataset(523, seed=1)
    o = make_dataset(4000, seed=2, domain=Domain.OUT)
    t = mix(d, o, Rng(0))
    assert len(t) == 4523
    assert rows(t) == rows(d) + rows(o)
    assert int((t.domain == int(Domain.OUT)).sum()) == 4000


def test_mix_with_empty_is_permutation():
    d = make_dataset(30)
    t = mix(d, Dataset.empty(3, 3), Rng(4))
    assert rows(t) == rows(d)
    assert not t.identical_to(d)


def test_mix_empty_empty():
    assert len(mix(Dataset.empty(2, 2), Dataset.empty(2, 2), Rng(0))) == 0


def test_mix_shape_mismatch():
    with pytest.raises(ValueError):
        mix(make_dataset(3, feature_dim=3), make_dataset(3, feature_dim=4), Rng(0))
    with pytest.raises(ValueError):
        mix(make_dataset(3, num_classes=3), make_dataset(3, num_classes=2), Rng(0))


def test_mix_keeps_sources():
    d = make_dataset(3, source=["a", "b", "c"])
    t = mix(d, make_dataset(2, domain=Domain.OUT), Rng(0))
    assert sorted(s for s in t.source if s is not None) == ["a", "b", "c"]
    assert sum(s is None for s in t.source) == 2


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 2**32))
def test_mix_preserves_multiset_union(n1, n2, seed):
    d, o = make_dataset(n1, seed=1), make_dataset(n2, seed=2, domain=Domain.OUT)
    assert rows(mix(d, o, Rng(seed))) == rows(d) + rows(o)


@pytest.mark.parametrize("n, sizes", [(100, (80, 10, 10)), (10, (8, 1, 1))])
def test_split_sizes(n, sizes):
    parts = split(make_dataset(n), SplitSpec(0.8, 0.1, 0.1), Rng(0))
    assert tuple(len(p) for p in parts) == sizes


def test_split_all_train():
    d = make_dataset(12)
    tr, dv, te = split(d, SplitSpec(1.0, 0.0, 0.0), Rng(0))
    assert rows(tr) == rows(d) and len(dv) == 0 and len(te) == 0


def test_split_too_small():
    with pytest.raises(ValueError):
        split(make_dataset(5), SplitSpec(0.8, 0.1, 0.1), Rng(0))


@pytest.mark.parametrize("fr", [(0.5, 0.5, 0.1), (-0.1, 0.6, 0.5), (float("nan"), 0.5, 0.5)])
def test_split_spec_invalid(fr):
    with pytest.raises(ValueError):
        SplitSpec(*fr)


@given(st.integers(5, 80), st.integers(0, 2**32))
def test_split_is_partition(n, seed):
    d = tagged_pool(n)
    parts = split(d, SplitSpec(0.6, 0.2, 0.2), Rng(seed))
    ids = np.concatenate([p.X[:, 0] for p in parts])
    assert sorted(ids) == list(range(n))
