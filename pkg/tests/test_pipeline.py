from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msdkmeans import (
    Dataset,
    InsufficientSurvivors,
    KMeansParams,
    MsdKmeansParams,
    MsdParams,
    SingleStageReport,
    Stage,
    VerdictClass,
    msd_detect,
    msd_kmeans_detect,
    stage_breakdown,
)

G = (VerdictClass.GLOBAL_OUTLIER, Stage.MSD)
L = (VerdictClass.LOCAL_OUTLIER, Stage.KMEANS)


@pytest.mark.parametrize("seed", range(8))
def test_one_to_five(seed):
    p = MsdKmeansParams(MsdParams(1.0), KMeansParams(k=2, seed=seed))
    r = msd_kmeans_detect(Dataset.from_values([1, 2, 3, 4, 5]), p)
    v = list(r.verdicts())
    assert [x.cls for x in v] == [VerdictClass.GLOBAL_OUTLIER, 0, 0, 0, VerdictClass.GLOBAL_OUTLIER]
    assert [x.stage for x in v] == [Stage.MSD, Stage.KMEANS, Stage.KMEANS, Stage.KMEANS, Stage.MSD]
    assert stage_breakdown(r) == {G: 2, L: 0}


def test_constant_dataset():
    r = msd_kmeans_detect(Dataset.from_values([4.0] * 10))
    assert r.n_outliers == 0
    assert stage_breakdown(r) == Counter()
    assert +stage_breakdown(r) == {}


def test_survivors_fewer_than_k():
    data = Dataset.from_values([1, 2, 3, 4, 5])
    with pytest.raises(InsufficientSurvivors) as e:
        msd_kmeans_detect(data, MsdKmeansParams(kmeans=KMeansParams(k=4)))
    assert e.value.removed == 2


def test_breakdown_rejects_single_stage():
    with pytest.raises(SingleStageReport):
        stage_breakdown(msd_detect(Dataset.from_values([1, 2, 3, 4, 5])))


def test_finds_local_outlier_inside_global_range():
    # tight bulk near 50 with one point at 56 that the global fence keeps
    rng = np.random.default_rng(0)
    bulk = rng.normal(50, 0.5, 400)
    values = np.concatenate([bulk, [56.0], [150.0, 160.0]])
    data = Dataset.from_values(values)
    r = msd_kmeans_detect(data, MsdKmeansParams(MsdParams(3.0), KMeansParams(k=2, seed=1)))
    classes = r.classes
    assert classes[401] == classes[402] == VerdictClass.GLOBAL_OUTLIER
    assert classes[400] == VerdictClass.LOCAL_OUTLIER
    assert r.details["stage1_removed"] == 2


def test_params_echo_and_determinism():
    rng = np.random.default_rng(1)
    data = Dataset.from_values(rng.normal(50, 5, 2000))
    p = MsdKmeansParams(kmeans=KMeansParams(seed=77))
    a, b = msd_kmeans_detect(data, p), msd_kmeans_detect(data, p)
    assert a.fingerprint() == b.fingerprint()
    assert a.params["kmeans"]["seed"] == 77 and a.params["msd"]["multiplier"] == 1.0


@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=120), st.integers(0, 2**32))
def test_composition(xs, seed):
    data = Dataset.from_values(xs)
    p = MsdKmeansParams(kmeans=KMeansParams(k=2, seed=seed))
    try:
        r = msd_kmeans_detect(data, p)
    except InsufficientSurvivors:
        return
    m = msd_detect(data, p.msd)
    assert set(np.flatnonzero(r.classes == VerdictClass.GLOBAL_OUTLIER)) == set(np.flatnonzero(m.outlier_mask))
    assert sorted(r.index.tolist()) == list(range(len(xs)))
    b = stage_breakdown(r)
    assert b[G] + b[L] == r.n_outliers
