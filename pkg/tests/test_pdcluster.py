import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdclust.pdcluster import (
    DegenerateClusterError,
    PdcConfig,
    distances,
    initial_centers,
    joint_distance_function,
    membership_probabilities,
    pdc,
    update_centers,
)


def fcm2(x, c, iters):
    # Plain fuzzy c-means with fuzzifier 2, written independently.
    for _ in range(iters):
        sq = ((x[:, None, :] - c[None]) ** 2).sum(-1)
        u = np.array([[1.0 / sum(sq[i, k] / sq[i, m] for m in range(c.shape[0])) for k in range(c.shape[0])]
                      for i in range(x.shape[0])])
        w = u ** 2
        c = (w.T @ x) / w.sum(0)[:, None]
    return c


def test_distances_example():
    d = distances([[0.0, 0.0], [3.0, 4.0]], [[0.0, 0.0], [3.0, 0.0]])
    np.testing.assert_array_equal(d, [[0.0, 9.0], [25.0, 16.0]])
    np.testing.assert_array_equal(distances([[0.0]], [[0.0]], floor=1e-12), [[1e-12]])


def test_probabilities_and_jdf_two_centers():
    d = np.array([[1.0, 3.0]])
    np.testing.assert_allclose(membership_probabilities(d), [[0.75, 0.25]])
    per_point, total = joint_distance_function(d)
    np.testing.assert_allclose(per_point, [0.75])
    assert total == pytest.approx(0.75)


def test_equal_distances_split_evenly():
    d = np.full((1, 4), 2.0)
    np.testing.assert_allclose(membership_probabilities(d), [[0.25] * 4])
    per_point, _ = joint_distance_function(d)
    np.testing.assert_allclose(per_point, [0.5])


def test_product_form_matches_inverse_form():
    d = np.random.default_rng(3).uniform(0.1, 5.0, (20, 4))
    num = np.stack([np.prod(np.delete(d, k, axis=1), axis=1) for k in range(4)], axis=1)
    np.testing.assert_allclose(membership_probabilities(d), num / num.sum(1, keepdims=True), rtol=1e-12)
    per_point, total = joint_distance_function(d)
    np.testing.assert_allclose(per_point, np.prod(d, 1) / num.sum(1), rtol=1e-12)
    assert total == pytest.approx(per_point.sum(), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**16), st.integers(1, 6))
def test_probability_identities(seed, K):
    d = np.random.default_rng(seed).uniform(1e-3, 1e3, (15, K))
    p = membership_probabilities(d)
    per_point, _ = joint_distance_function(d)
    np.testing.assert_allclose(p.sum(1), 1.0, atol=1e-12)
    np.testing.assert_allclose(p * d, np.repeat(per_point[:, None], K, 1), rtol=1e-9)
    assert np.all(per_point <= d.min(1) * (1 + 1e-12))


def test_update_centers_squared_weights():
    x = np.array([[0.0], [2.0]])
    p = np.array([[0.5, 0.5], [0.25, 0.75]])
    # weights column 1: 0.25, 0.0625 -> center 0.125/0.3125
    np.testing.assert_allclose(update_centers(x, p), [[0.4], [2 * 0.5625 / 0.8125]])


def test_update_centers_with_distance_weights():
    x = np.array([[0.0], [2.0]])
    d = distances(x, [[0.5]])
    # weights 1/0.25 and 1/2.25
    np.testing.assert_allclose(update_centers(x, np.ones((2, 1)), d), [[0.2]])


def test_update_centers_rejects_empty_cluster():
    with pytest.raises(DegenerateClusterError) as err:
        update_centers(np.ones((3, 1)), np.array([[1.0, 0.0]] * 3))
    assert err.value.clusters == [1]


def test_initial_centers_are_distinct_rows():
    x = np.arange(10.0)[:, None]
    c = initial_centers(x, 4, np.random.default_rng(0))
    assert len(set(c[:, 0])) == 4 and set(c[:, 0]) <= set(x[:, 0])


def test_single_cluster_converges_to_mean():
    x = np.random.default_rng(0).normal(size=(30, 3))
    m = pdc(x, 1)
    np.testing.assert_allclose(m.centers[0], x.mean(0), atol=1e-12)
    assert m.jdf_total == pytest.approx(((x - x.mean(0)) ** 2).sum())
    np.testing.assert_array_equal(m.probabilities, 1.0)


def test_two_separated_pairs():
    x = np.array([[0.0], [1.0], [100.0], [101.0]])
    m = pdc(x, 2, PdcConfig(seed=0))
    np.testing.assert_allclose(np.sort(m.centers[:, 0]), [0.5, 100.5], atol=1e-3)
    assert m.labels[0] == m.labels[1] != m.labels[2] == m.labels[3]


def test_matches_fuzzy_c_means_oracle():
    x = np.random.default_rng(5).normal(size=(40, 2))
    init = np.array([[-1.0, 0.3], [0.2, 1.1], [1.5, -0.7]])
    m = pdc(x, 3, PdcConfig(max_iters=5, min_jdf_decrease=0.0), init=init)
    np.testing.assert_allclose(m.centers, fcm2(x, init.copy(), m.iterations), atol=1e-10)


def test_same_seed_same_model(make_blobs):
    x, K = make_blobs(11)
    a, b = pdc(x, K, PdcConfig(seed=4)), pdc(x, K, PdcConfig(seed=4))
    np.testing.assert_array_equal(a.centers, b.centers)
    assert a.trace == b.trace


def test_centers_at_data_points_stay_finite():
    x = np.array([[0.0], [0.0], [5.0], [5.0]])
    m = pdc(x, 2, init=[[0.0], [5.0]])
    assert np.all(np.isfinite(m.probabilities))
    np.testing.assert_allclose(m.probabilities.sum(1), 1.0)


def test_input_validation():
    with pytest.raises(ValueError):
        pdc(np.zeros((2, 1)), 3)
    with pytest.raises(ValueError):
        pdc([[np.nan]], 1)
    with pytest.raises(ValueError):
        pdc(np.zeros((4, 2)), 2, init=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        PdcConfig(distance_floor=0.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**16), st.floats(0.1, 10.0), st.floats(-50.0, 50.0))
def test_scale_and_translation_equivariance(seed, scale, shift):
    x = np.random.default_rng(seed).normal(size=(25, 2))
    cfg = PdcConfig(max_iters=20, min_jdf_decrease=0.0)
    base = pdc(x, 2, cfg)
    moved = pdc(scale * x + shift, 2, cfg)
    np.testing.assert_allclose(moved.centers, scale * base.centers + shift, rtol=1e-6, atol=1e-6 * (1 + abs(shift)))
    assert moved.jdf_total == pytest.approx(scale ** 2 * base.jdf_total, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**16))
def test_trace_is_nonincreasing(seed):
    from conftest import blobs

    x, K = blobs(seed, n=60)
    t = np.array(pdc(x, K).trace)
    assert np.all(np.diff(t) <= 1e-12 * t[:-1])


def test_distances_hand_example():
    np.testing.assert_array_equal(distances([[0.0, 0.0]], [[1.0, 0.0], [0.0, 2.0]]), [[1.0, 4.0]])


def test_point_at_center_has_near_zero_jdf():
    per_point, _ = joint_distance_function(np.array([[1e-12, 5.0]]))
    assert per_point[0] < 1e-11


def test_distance_weighted_update_pulls_to_coincident_point():
    x = np.array([[0.0], [1.0], [10.0]])
    d = distances(x, [[1.0]], floor=1e-12)
    c = update_centers(x, np.ones((3, 1)), d)
    assert c[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_two_tight_pairs():
    x = np.array([[0.0], [0.1], [10.0], [10.1]])
    m = pdc(x, 2, PdcConfig(seed=1))
    np.testing.assert_allclose(np.sort(m.centers[:, 0]), [0.05, 10.05], atol=1e-3)
    assert np.all(m.probabilities.max(1) > 0.99)
