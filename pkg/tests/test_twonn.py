"""Estimator contracts: ratios, fits, global and local estimates."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from lidscope.errors import DegenerateFitError, DegenerateInputError
from lidscope.pointcloud import PointCloud, SamplingConfig
from lidscope.rng import STREAM_SYNTHETIC, make_rng
from lidscope.synthetic import hypercube_cloud, pareto_ratio_sample, two_manifold_mixture
from lidscope.twonn import (
    EstimateSummary,
    LocalEstimates,
    RatioSample,
    fit_dimension_linfit,
    fit_dimension_mle,
    local_twonn,
    summarize,
    twonn_global,
    twonn_ratios,
)


def unit_square_corners() -> PointCloud:
    return PointCloud(data=np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]))


# ---------------------------------------------------------------------------
# Ratios


def test_square_corner_ratios_all_one():
    sample = twonn_ratios(unit_square_corners())
    assert sample.n_used == 4
    assert sample.n_dropped == 0
    assert np.allclose(sample.mus, 1.0)


def test_ratios_need_three_points():
    with pytest.raises(ValueError):
        twonn_ratios(PointCloud(data=np.array([[0.0], [1.0]])))


def test_duplicate_points_are_dropped_with_warning(caplog):
    data = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with caplog.at_level("WARNING"):
        sample = twonn_ratios(PointCloud(data=data))
    assert sample.n_dropped == 2
    assert sample.n_used == 2
    assert "dropped 2" in caplog.text


def test_all_duplicates_is_degenerate():
    data = np.zeros((6, 3))
    with pytest.raises(DegenerateInputError):
        twonn_ratios(PointCloud(data=data))


def test_ratio_sample_validation():
    with pytest.raises(ValueError):
        RatioSample(mus=np.array([2.0]), n_used=2, n_dropped=0)
    with pytest.raises(ValueError):
        RatioSample(mus=np.array([0.5]), n_used=1, n_dropped=0)
    with pytest.raises(ValueError):
        RatioSample(mus=np.array([1.5]), n_used=1, n_dropped=-1)


def test_uniform_square_ratios_follow_pareto_two():
    # Kolmogorov-Smirnov against the Pareto shape-2 law at alpha=0.01;
    # finite-sample boundary effects allow occasional rejections, so the
    # gate is a majority over seeds.
    passed = 0
    for seed in range(5):
        rng = make_rng(seed, STREAM_SYNTHETIC)
        sample = twonn_ratios(PointCloud(data=rng.random((10_000, 2))))
        result = stats.kstest(sample.mus, "pareto", args=(2.0,))
        passed += result.pvalue > 0.01
    assert passed >= 3


# ---------------------------------------------------------------------------
# Linear fit


def linfit_oracle(mus, discard_fraction):
    """Straight transcription of the fit definition, in plain Python."""
    n = len(mus)
    keep = n - max(math.ceil(discard_fraction * n), 1)
    ordered = sorted(mus)[:keep]
    xs = [math.log(m) for m in ordered]
    ys = [-math.log(1.0 - (i + 1) / n) for i in range(keep)]
    return sum(x * y for x, y in zip(xs, ys)) / sum(x * x for x in xs)


def test_linfit_matches_hand_oracle():
    mus = [1.1, 1.2, 1.3, 1.5, 2.0]
    sample = RatioSample(mus=np.array(mus), n_used=5, n_dropped=0)
    for f in (0.0, 0.1, 0.4):
        expected = linfit_oracle(mus, f)
        got = fit_dimension_linfit(sample, discard_fraction=f)
        assert got == pytest.approx(expected, rel=1e-14)


def test_linfit_always_excludes_top_ratio():
    # With discard_fraction=0 the largest ratio must still be dropped:
    # its CDF value 1 maps to -log(0).  A huge outlier must not move the fit.
    base = list(np.linspace(1.05, 1.6, 40))
    with_outlier = base[:-1] + [1e6]
    a = fit_dimension_linfit(
        RatioSample(mus=np.array(base), n_used=40, n_dropped=0), discard_fraction=0.0
    )
    b = fit_dimension_linfit(
        RatioSample(mus=np.array(with_outlier), n_used=40, n_dropped=0),
        discard_fraction=0.0,
    )
    assert a == pytest.approx(b, rel=1e-12)


def test_linfit_recovers_pareto_shape():
    sample = pareto_ratio_sample(5.0, 100_000, seed=1)
    assert 4.8 <= fit_dimension_linfit(sample) <= 5.2


def test_linfit_degenerate_when_all_ratios_one():
    sample = twonn_ratios(unit_square_corners())
    with pytest.raises(DegenerateFitError):
        fit_dimension_linfit(sample)


def test_linfit_argument_errors():
    sample = pareto_ratio_sample(2.0, 100, seed=0)
    with pytest.raises(ValueError):
        fit_dimension_linfit(sample, discard_fraction=1.0)
    with pytest.raises(ValueError):
        fit_dimension_linfit(sample, discard_fraction=-0.1)
    tiny = RatioSample(mus=np.array([1.1, 1.2, 1.3]), n_used=3, n_dropped=0)
    with pytest.raises(ValueError, match="remain after discarding"):
        fit_dimension_linfit(tiny, discard_fraction=0.5)


# ---------------------------------------------------------------------------
# MLE


def test_mle_exact_values():
    e = math.e
    sample = RatioSample(mus=np.array([e, e]), n_used=2, n_dropped=0)
    assert fit_dimension_mle(sample) == pytest.approx(1.0, rel=1e-15)
    mus = [1.5, 3.0]
    expected = 2.0 / (math.log(1.5) + math.log(3.0))
    got = fit_dimension_mle(RatioSample(mus=np.array(mus), n_used=2, n_dropped=0))
    assert got == pytest.approx(expected, rel=1e-14)


def test_mle_recovers_pareto_shape():
    sample = pareto_ratio_sample(3.0, 100_000, seed=2)
    assert 2.95 <= fit_dimension_mle(sample) <= 3.05


def test_mle_errors():
    with pytest.raises(ValueError):
        fit_dimension_mle(RatioSample(mus=np.array([1.5]), n_used=1, n_dropped=0))
    ones = RatioSample(mus=np.ones(10), n_used=10, n_dropped=0)
    with pytest.raises(DegenerateFitError):
        fit_dimension_mle(ones)


# ---------------------------------------------------------------------------
# Global estimate


def test_global_segment_close_to_one():
    cloud = hypercube_cloud(5000, 1, 10, seed=3)
    assert abs(twonn_global(cloud) - 1.0) <= 0.1


def test_global_square_in_high_ambient():
    cloud = hypercube_cloud(6000, 2, 128, seed=4)
    assert 1.9 <= twonn_global(cloud) <= 2.1


def test_global_five_cube():
    cloud = hypercube_cloud(6000, 5, 128, seed=5)
    assert 4.5 <= twonn_global(cloud) <= 5.5


def test_estimators_agree_on_well_sampled_manifolds():
    for d in (2, 3, 5):
        cloud = hypercube_cloud(4000, d, 32, seed=20 + d)
        linfit = twonn_global(cloud, estimator="linfit")
        mle = twonn_global(cloud, estimator="mle")
        assert abs(linfit - mle) / linfit <= 0.1


def test_global_validation():
    cloud = hypercube_cloud(100, 2, 4, seed=0)
    with pytest.raises(ValueError):
        twonn_global(cloud, estimator="magic")
    with pytest.raises(ValueError):
        twonn_global(PointCloud(data=np.zeros((2, 2))))


# ---------------------------------------------------------------------------
# Local estimates


def test_local_saturated_neighborhood_equals_global():
    cloud = hypercube_cloud(128, 3, 8, seed=6)
    config = SamplingConfig(n_tokens=128, n_neighbors=128, seed=0)
    for estimator in ("linfit", "mle"):
        local = local_twonn(cloud, config, estimator=estimator)
        global_est = twonn_global(cloud, estimator=estimator)
        assert np.max(np.abs(local.values - global_est)) <= 1e-9 * abs(global_est)


def test_local_estimates_align_with_returned_cloud():
    cloud = hypercube_cloud(900, 2, 8, seed=7)
    config = SamplingConfig(n_tokens=300, n_neighbors=32, seed=1)
    est = local_twonn(cloud, config)
    assert est.values.shape == (300,)
    assert est.cloud is not None and est.cloud.n_points == 300
    pool = {row.tobytes() for row in cloud.data}
    assert all(row.tobytes() in pool for row in est.cloud.data)
    assert est.params == config


def test_local_separates_mixed_dimensions():
    cloud, labels = two_manifold_mixture(800, ambient_dim=16, seed=8)
    config = SamplingConfig(n_tokens=1600, n_neighbors=32, seed=0)
    est = local_twonn(cloud, config)
    mean_disk = est.values[labels == 2].mean()
    mean_ball = est.values[labels == 5].mean()
    assert mean_ball - mean_disk > 1.5


def test_degenerate_neighborhoods_become_zero_with_warning(caplog):
    xs, ys = np.meshgrid(np.arange(8.0), np.arange(8.0))
    grid = PointCloud(data=np.column_stack([xs.ravel(), ys.ravel()]))
    config = SamplingConfig(n_tokens=64, n_neighbors=16, seed=0)
    with caplog.at_level("WARNING"):
        est = local_twonn(grid, config)
    # every lattice neighbourhood has r1 == r2 == 1 for all members
    assert np.all(est.values == 0.0)
    assert est.n_degenerate == 64
    assert "degenerate" in caplog.text


def test_local_spread_shrinks_with_neighborhood_size():
    # Weak locality property: larger neighbourhoods average more ratios,
    # so the spread of local estimates should not grow with L.
    monotone = 0
    for seed in range(3):
        cloud = hypercube_cloud(1500, 3, 16, seed=30 + seed)
        stds = []
        for L in (16, 32, 64, 128):
            config = SamplingConfig(n_tokens=1500, n_neighbors=L, seed=0)
            stds.append(summarize(local_twonn(cloud, config).values).std)
        monotone += all(b <= a for a, b in zip(stds, stds[1:]))
    assert monotone >= 2


def test_local_validation():
    cloud = hypercube_cloud(100, 2, 4, seed=9)
    with pytest.raises(ValueError):
        local_twonn(cloud, SamplingConfig(n_tokens=100, n_neighbors=101, seed=0))
    with pytest.raises(ValueError):
        local_twonn(
            cloud,
            SamplingConfig(n_tokens=100, n_neighbors=16, seed=0),
            estimator="magic",
        )
    with pytest.raises(ValueError):
        local_twonn(
            cloud,
            SamplingConfig(n_tokens=100, n_neighbors=16, seed=0),
            discard_fraction=1.5,
        )
    with pytest.raises(ValueError):
        LocalEstimates(values=np.zeros(3), params=None, cloud=cloud)


def test_local_thread_count_is_invisible():
    cloud = hypercube_cloud(2000, 4, 16, seed=10)
    config = SamplingConfig(n_tokens=2000, n_neighbors=48, seed=0)
    a = local_twonn(cloud, config, threads=1)
    b = local_twonn(cloud, config, threads=5)
    assert np.array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# Summaries


def quartile_oracle(values, q):
    """Linear interpolation between order statistics, spelled out."""
    ordered = sorted(values)
    pos = (len(ordered) - 1) * q
    lo = math.floor(pos)
    hi = math.ceil(pos)
    return ordered[lo] + (ordered[hi] - ordered[lo]) * (pos - lo)


def test_summary_constant_values():
    s = summarize(np.array([4.0, 4.0, 4.0]))
    assert s == EstimateSummary(count=3, mean=4.0, std=0.0, median=4.0, q1=4.0, q3=4.0)


def test_summary_single_value_has_zero_std():
    s = summarize(np.array([2.5]))
    assert s.count == 1
    assert s.std == 0.0
    assert s.median == 2.5


def test_summary_matches_plain_python_oracle():
    rng = np.random.default_rng(11)
    values = rng.uniform(0, 10, size=101)
    s = summarize(values)
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    assert s.mean == pytest.approx(mean, rel=1e-12)
    assert s.std == pytest.approx(math.sqrt(var), rel=1e-12)
    assert s.median == pytest.approx(quartile_oracle(values, 0.5), rel=1e-12)
    assert s.q1 == pytest.approx(quartile_oracle(values, 0.25), rel=1e-12)
    assert s.q3 == pytest.approx(quartile_oracle(values, 0.75), rel=1e-12)


def test_summary_rejects_bad_input():
    with pytest.raises(ValueError):
        summarize(np.array([]))
    with pytest.raises(ValueError):
        summarize(np.array([1.0, np.nan]))
