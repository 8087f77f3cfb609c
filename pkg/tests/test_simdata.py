import numpy as np
import pytest
from scipy.stats import chi2

from pdclust.simdata import (
    MzConfig,
    equicorrelation_root,
    generate_independent,
    generate_mz,
    orthogonal_direction,
    preset,
    r_min,
    read_dataset_csv,
    write_dataset_csv,
)


def test_r_min_one_dimension():
    # The 1 - alpha chi-square(1) quantile is 1 when alpha = P(|Z| > 1).
    alpha = chi2.sf(1.0, 1)
    assert alpha == pytest.approx(0.3173, abs=1e-4)
    assert r_min(1, alpha) == pytest.approx(2.2)


def test_r_min_seven_dimensions():
    expected = 2.2 * np.sqrt(chi2.ppf(0.99, 7)) / np.sqrt(7)
    assert r_min(7, 0.01) == pytest.approx(expected)
    assert r_min(7, 0.01) == pytest.approx(3.574, abs=1e-3)


def test_r_min_decreases_with_alpha():
    vals = [r_min(5, a) for a in (0.001, 0.01, 0.05, 0.1)]
    assert np.all(np.diff(vals) < 0)


def test_mz_counts():
    ds = generate_mz(MzConfig())
    assert ds.x.shape == (400, 7)
    assert ds.outlier_flags.sum() == 80
    for k in range(1, 5):
        assert np.sum(ds.labels == k) == 100
        assert np.sum(ds.outlier_flags[ds.labels == k]) == 20


def test_outlier_count_rounds_half_to_even():
    ds = generate_mz(MzConfig(K=1, n_per_cluster=10, eps=0.25, r=5.0))
    assert ds.outlier_flags.sum() == 2


def test_a0_is_unit_and_orthogonal_to_ones():
    rng = np.random.default_rng(0)
    for J in (2, 3, 7, 20):
        a0 = orthogonal_direction(J, rng)
        assert np.linalg.norm(a0) == pytest.approx(1.0)
        assert abs(a0.sum()) < 1e-12
    with pytest.raises(ValueError):
        orthogonal_direction(1, rng)


def test_outlier_shift_is_along_a0():
    cfg = MzConfig(K=1, n_per_cluster=20000, eps=0.5, seed=3)
    ds = generate_mz(cfg)
    a0 = np.array(ds.meta["a0"])
    gap = ds.x[ds.outlier_flags].mean(0) - ds.x[~ds.outlier_flags].mean(0)
    np.testing.assert_allclose(gap, cfg.r * np.sqrt(cfg.J) * a0, atol=0.1)


def test_clean_covariance_matches_sigma_squared():
    cfg = MzConfig(K=1, n_per_cluster=40000, eps=0.0, seed=1)
    ds = generate_mz(cfg)
    sigma = equicorrelation_root(cfg.J, cfg.rho)
    np.testing.assert_allclose(np.cov(ds.x.T), sigma @ sigma, atol=0.1)
    # Closed form: diag 1 + (J-1) rho^2, off-diagonal 2 rho + (J-2) rho^2.
    corr = np.corrcoef(ds.x.T)[0, 1]
    assert corr == pytest.approx((1 + 5 * 0.25) / (1 + 6 * 0.25), abs=0.01)


def test_centers_on_sphere():
    ds = generate_mz(MzConfig())
    np.testing.assert_allclose(np.linalg.norm(ds.meta["centers"], axis=1), 15.0)


def test_config_validation():
    with pytest.raises(ValueError):
        MzConfig(J=1)
    with pytest.raises(ValueError):
        MzConfig(r=1.0)
    MzConfig(r=1.0, enforce_rmin=False)
    with pytest.raises(ValueError):
        MzConfig(rho=1.0)


def test_independent_preset():
    ds = preset("indep-450x2", 0)
    assert ds.x.shape == (450, 2)
    assert [int(np.sum(ds.labels == k)) for k in range(1, 5)] == [150, 120, 100, 80]
    assert not ds.outlier_flags.any()
    np.testing.assert_allclose(ds.x[ds.labels == 4].mean(0), [7.0, 7.0], atol=0.4)


def test_generate_independent_validates():
    with pytest.raises(ValueError):
        generate_independent(2, [5], [[0.0]], [[1.0]], 0)
    with pytest.raises(ValueError):
        generate_independent(1, [5], [[0.0]], [[-1.0]], 0)


@pytest.mark.parametrize("name", ["mz-paper", "indep-450x2"])
def test_presets_are_deterministic(name):
    a, b = preset(name, 4), preset(name, 4)
    np.testing.assert_array_equal(a.x, b.x)
    assert not np.array_equal(a.x, preset(name, 5).x)


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("iris")


def test_csv_round_trip(tmp_path):
    ds = preset("mz-paper", 0)
    path = tmp_path / "d.csv"
    ds.to_csv(path)
    x, labels, flags = read_dataset_csv(path)
    np.testing.assert_array_equal(x, ds.x)
    np.testing.assert_array_equal(labels, ds.labels)
    np.testing.assert_array_equal(flags, ds.outlier_flags)
    write_dataset_csv(path, ds.x)
    x2, l2, f2 = read_dataset_csv(path)
    np.testing.assert_array_equal(x2, ds.x)
    assert l2 is None and f2 is None


def test_independent_cluster_means_within_standard_error():
    ds = preset("indep-450x2", 3)
    p = ds.meta
    for k, size in enumerate(p["sizes"]):
        pts = ds.x[ds.labels == k + 1]
        bound = 4 * np.array(p["sds"][k]) / np.sqrt(size)
        assert np.all(np.abs(pts.mean(0) - p["means"][k]) <= bound)


def test_pure_standard_normal_case():
    n = 5000
    ds = generate_mz(MzConfig(K=1, n_per_cluster=n, eps=0.0, rho=0.0, sphere_radius=0.0, seed=2))
    assert np.all(np.abs(ds.x.mean(0)) <= 4 / np.sqrt(n))
    np.testing.assert_allclose(np.cov(ds.x.T), np.eye(7), atol=0.1)
