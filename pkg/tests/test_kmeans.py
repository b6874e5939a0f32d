import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from msdkmeans import (
    Dataset,
    DimensionMismatch,
    InsufficientData,
    KMeansParams,
    Stage,
    VerdictClass,
    cluster_thresholds,
    fit,
    fit_parallel,
    intra_distances,
    kmeans_detect,
)
from msdkmeans.kmeans import BLOCK_SIZE, with_parallel


def test_two_obvious_clusters():
    data = Dataset.from_values([1, 2, 10, 11])
    sse, labels = oracles.best_partition_1d([1, 2, 10, 11], 2)
    for seed in range(10):
        m = fit(data, KMeansParams(k=2, seed=seed))
        assert sorted(m.centroids.ravel().tolist()) == [1.5, 10.5]
        a = m.assignments
        assert a[0] == a[1] != a[2] == a[3]
        assert (a[0] == a[1]) == (labels[0] == labels[1])
        assert sum(m.distances ** 2) == pytest.approx(sse)


def test_k1_is_global_mean(rng):
    x = rng.normal(size=(50, 2))
    m = fit(Dataset(x, np.arange(50)), KMeansParams(k=1))
    np.testing.assert_allclose(m.centroids[0], x.mean(axis=0), atol=1e-12)


def test_k_equals_n():
    data = Dataset.from_values([3.0, 1.0, 4.0, 1.5, 9.0])
    m = fit(data, KMeansParams(k=5))
    assert sorted(m.centroids.ravel().tolist()) == [1.0, 1.5, 3.0, 4.0, 9.0]
    assert np.all(m.distances == 0)
    assert np.all(cluster_thresholds(m) == 0)


def test_n_less_than_k():
    with pytest.raises(InsufficientData):
        fit(Dataset.from_values([1.0, 2.0]), KMeansParams(k=3))


def test_duplicates_force_empty_cluster_repair():
    data = Dataset.from_values([5.0] * 6)
    m = fit(data, KMeansParams(k=3))
    assert m.converged
    assert all(c.count >= 1 for c in m.per_cluster)
    assert np.all(m.distances == 0)


def test_intra_distances_example():
    data = Dataset.from_values([2, 3, 4])
    m = fit(data, KMeansParams(k=1))
    assert intra_distances(m, data).tolist() == [1.0, 0.0, 1.0]
    np.testing.assert_array_equal(m.distances, [1.0, 0.0, 1.0])


def test_intra_distances_dimension_mismatch():
    m = fit(Dataset.from_values([2, 3, 4]), KMeansParams(k=1))
    with pytest.raises(DimensionMismatch):
        intra_distances(m, Dataset(np.zeros((3, 2)), np.arange(3)))


def test_threshold_example():
    m = fit(Dataset.from_values([2, 3, 4]), KMeansParams(k=1, threshold_multiplier=1.5))
    c = m.per_cluster[0]
    assert c.mean == pytest.approx(2 / 3)
    assert c.std == pytest.approx(math.sqrt(2 / 9))
    assert c.threshold == pytest.approx(1.3737734478532139, abs=1e-12)
    assert kmeans_detect(Dataset.from_values([2, 3, 4]), KMeansParams(k=1)).n_outliers == 0


def test_detect_flags_far_member():
    # one cluster of 20 tightly packed points and one far member, plus a distant cluster
    values = [50 + 0.1 * i for i in range(20)] + [58.0] + [200 + 0.1 * i for i in range(10)]
    data = Dataset.from_values(values)
    r = kmeans_detect(data, KMeansParams(k=2, seed=3))
    assert r.index[r.outlier_mask].tolist() == [20]
    v = list(r.verdicts())[20]
    assert v.cls == VerdictClass.LOCAL_OUTLIER and v.stage == Stage.SINGLE
    assert v.score > 1


def test_score_is_distance_over_threshold():
    data = Dataset.from_values([0, 1, 2, 3, 4, 30, 31, 32, 33, 50])
    r = kmeans_detect(data, KMeansParams(k=2, seed=1))
    m = fit(data, KMeansParams(k=2, seed=1))
    theta = m.thresholds[m.assignments]
    np.testing.assert_allclose(r.scores, m.distances / theta)


def test_parallel_workers_one_matches_serial(rng):
    data = Dataset.from_values(rng.normal(size=1000))
    a = fit(data, KMeansParams(k=3, seed=9))
    b = fit_parallel(data, with_parallel(KMeansParams(k=3, seed=9), 1))
    assert a.centroids.tobytes() == b.centroids.tobytes()
    assert a.assignments.tobytes() == b.assignments.tobytes()


def test_parallel_matches_serial_multi_block(rng):
    n = 2 * BLOCK_SIZE + 123
    data = Dataset.from_values(np.concatenate([rng.normal(40, 3, n // 2), rng.normal(60, 5, n - n // 2)]))
    p = KMeansParams(k=2, seed=4)
    a = fit(data, p)
    b = fit_parallel(data, with_parallel(p, 4))
    assert a.centroids.tobytes() == b.centroids.tobytes()
    assert a.assignments.tobytes() == b.assignments.tobytes()
    assert a.distances.tobytes() == b.distances.tobytes()
    assert a.inertia_history == b.inertia_history


def test_params_validation():
    for kwargs in ({"k": 0}, {"max_iterations": 0}, {"threshold_multiplier": 0},
                   {"workers": 0}, {"seed": -1}):
        with pytest.raises(ValueError):
            KMeansParams(**kwargs)


def test_max_iterations_respected(rng):
    data = Dataset.from_values(rng.normal(size=500))
    m = fit(data, KMeansParams(k=5, max_iterations=1))
    assert m.iterations_run == 1


fit_data = st.tuples(
    st.lists(st.floats(-100, 100), min_size=1, max_size=80),
    st.sampled_from([1, 2, 3, 5]),
    st.integers(0, 2**32),
)


@given(fit_data)
def test_model_invariants(args):
    xs, k, seed = args
    if len(xs) < k:
        return
    data = Dataset.from_values(xs)
    m = fit(data, KMeansParams(k=k, seed=seed))
    x = np.asarray(xs)
    assert m.assignments.min() >= 0 and m.assignments.max() < k
    # inertia never increases
    h = m.inertia_history
    assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(h, h[1:]))
    # thresholds from a brute-force pass over raw distances
    for j, c in enumerate(m.per_cluster):
        members = x[m.assignments == j]
        if members.size == 0:
            continue
        d = [abs(v - m.centroids[j, 0]) for v in members]
        mu, sigma = oracles.mean_std(d)
        assert c.mean == pytest.approx(mu, abs=1e-9)
        assert c.std == pytest.approx(sigma, abs=1e-9)
        assert c.threshold == pytest.approx(mu + 1.5 * sigma, abs=1e-9)
        assert c.threshold >= c.mean >= 0
        if m.converged:
            assert m.centroids[j, 0] == pytest.approx(members.mean(), abs=1e-9)
    if m.converged:
        # every point at least as close to its centroid as to any other
        d_all = np.abs(x[:, None] - m.centroids[None, :, 0])
        own = d_all[np.arange(len(x)), m.assignments]
        assert np.all(own <= d_all.min(axis=1) + 1e-9)
