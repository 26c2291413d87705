"""Built-in verification suite on synthetic data with known answers.

Each check exercises one guarantee of the pipeline end to end: dimension
recovery on manifolds of known intrinsic dimension, estimator agreement
with direct Pareto samples, exactness of the neighbour search against a
naive oracle, detection of mixed-dimension regions, the qualitative
response to Gaussian perturbation, invariance under scaling and isometry,
thread-count determinism, neighbourhood saturation, and checkpoint-series
landmark detection.  The CLI ``selftest`` command runs all of them; they
are also the backbone of the automated acceptance tests.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import hausdorff, noise_sweep, track_checkpoints
from .knn import knn_exact
from .pointcloud import PointCloud, SamplingConfig
from .rng import STREAM_SYNTHETIC, make_rng
from .synthetic import (
    hypercube_cloud,
    pareto_ratio_sample,
    random_rotation,
    two_density_cloud,
    two_manifold_mixture,
)
from .twonn import (
    fit_dimension_linfit,
    fit_dimension_mle,
    local_twonn,
    summarize,
    twonn_global,
)

RECOVERY_CASES = ((1, 0.10), (2, 0.10), (5, 0.10), (9, 0.15))
RECOVERY_N = 10_000
RECOVERY_AMBIENT = 128
RECOVERY_TIME_LIMIT_S = 60.0

PARETO_SHAPES = (1, 3, 5, 8)
PARETO_N = 100_000
PARETO_TOL = 0.03

KNN_CLOUDS = 50

NOISE_SIGMAS = (0.0, 0.001, 0.002, 0.004, 0.01)
NOISE_SEEDS = (0, 1, 2, 3, 4)
NOISE_N = 10_000
NOISE_L = 64

INVARIANCE_TOL = 1e-6
SATURATION_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _finish(name: str, started: float, passed: bool, detail: str) -> CheckResult:
    return CheckResult(
        name=name, passed=passed, detail=detail, seconds=time.perf_counter() - started
    )


def check_dimension_recovery(
    estimator: str = "linfit", discard_fraction: float = 0.1
) -> CheckResult:
    """Global estimates on rotated hypercube samples of known dimension."""
    started = time.perf_counter()
    details = []
    passed = True
    for dim, tol in RECOVERY_CASES:
        case_start = time.perf_counter()
        try:
            cloud = hypercube_cloud(
                RECOVERY_N, dim, RECOVERY_AMBIENT, seed=100 + dim
            )
            estimate = twonn_global(
                cloud, estimator=estimator, discard_fraction=discard_fraction
            )
        except Exception as exc:  # a broken estimator must fail, not crash
            passed = False
            details.append(f"d={dim}: error: {exc}")
            continue
        elapsed = time.perf_counter() - case_start
        rel = abs(estimate - dim) / dim
        ok = rel <= tol and elapsed < RECOVERY_TIME_LIMIT_S
        passed = passed and ok
        details.append(
            f"d={dim}: {estimate:.3f} (rel {rel:.1%}, tol {tol:.0%}, {elapsed:.1f}s)"
        )
    return _finish("dimension-recovery", started, passed, "; ".join(details))


def check_pareto_oracle() -> CheckResult:
    """Both estimators on ratios drawn straight from Pareto(shape)."""
    started = time.perf_counter()
    details = []
    passed = True
    for shape in PARETO_SHAPES:
        sample = pareto_ratio_sample(float(shape), PARETO_N, seed=7 + shape)
        for label, value in (
            ("linfit", fit_dimension_linfit(sample)),
            ("mle", fit_dimension_mle(sample)),
        ):
            rel = abs(value - shape) / shape
            ok = rel <= PARETO_TOL
            passed = passed and ok
            details.append(f"{label} d={shape}: {value:.3f} ({rel:.2%})")
    return _finish("pareto-oracle", started, passed, "; ".join(details))


def _knn_oracle_row(points: np.ndarray, query: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    diff = points - points[query]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dist[query] = np.inf
    order = np.lexsort((np.arange(points.shape[0]), dist))[:k]
    return order, dist[order]


def check_knn_exactness(n_clouds: int = KNN_CLOUDS, seed: int = 2024) -> CheckResult:
    """Blocked search vs. a naive per-query oracle on random clouds."""
    started = time.perf_counter()
    rng = make_rng(seed, STREAM_SYNTHETIC)
    worst_rel = 0.0
    for cloud_idx in range(n_clouds):
        n = int(rng.integers(50, 1501))
        dim = int(rng.integers(1, 65))
        k = int(rng.integers(1, min(16, n - 1) + 1))
        points = rng.standard_normal((n, dim))
        graph = knn_exact(PointCloud(data=points), k, threads=1 + cloud_idx % 3)
        for query in range(n):
            oracle_idx, oracle_dist = _knn_oracle_row(points, query, k)
            if not np.array_equal(graph.indices[query], oracle_idx):
                return _finish(
                    "knn-exactness",
                    started,
                    False,
                    f"cloud {cloud_idx} (n={n}, dim={dim}, k={k}): index mismatch "
                    f"at query {query}",
                )
            denom = np.maximum(oracle_dist, 1e-300)
            rel = float(np.max(np.abs(graph.distances[query] - oracle_dist) / denom))
            worst_rel = max(worst_rel, rel)
            if rel > 1e-6:
                return _finish(
                    "knn-exactness",
                    started,
                    False,
                    f"cloud {cloud_idx}: distance off by {rel:.2e} relative",
                )
    return _finish(
        "knn-exactness",
        started,
        True,
        f"{n_clouds} clouds exact; worst distance deviation {worst_rel:.2e}",
    )


def check_heterogeneity() -> CheckResult:
    """Mixture of a 2-D disk and a 5-D ball resolves into two modes."""
    started = time.perf_counter()
    n_each = 3000
    cloud, labels = two_manifold_mixture(n_each, ambient_dim=32, seed=0)
    config = SamplingConfig(n_tokens=cloud.n_points, n_neighbors=64, seed=0)
    est = local_twonn(cloud, config)
    mean_disk = float(np.mean(est.values[labels == 2]))
    mean_ball = float(np.mean(est.values[labels == 5]))
    global_est = twonn_global(cloud)
    lo, hi = sorted([mean_disk, mean_ball])
    ok = (
        abs(mean_disk - 2.0) <= 0.6
        and abs(mean_ball - 5.0) <= 0.6
        and lo < global_est < hi
    )
    detail = (
        f"disk mean {mean_disk:.3f} (target 2±0.6), "
        f"ball mean {mean_ball:.3f} (target 5±0.6), "
        f"global {global_est:.3f} strictly between: {lo < global_est < hi}"
    )
    return _finish("heterogeneity", started, ok, detail)


def check_noise_robustness() -> CheckResult:
    """Perturbation response: displacement grows, estimate spread widens.

    The 5-D manifold is sampled at two very different densities (as real
    embedding clouds are): its dense region has nearest-neighbour scales
    comparable to the smallest perturbation, so the estimate spread
    responds to every noise level instead of only the largest.
    """
    started = time.perf_counter()
    base = two_density_cloud(NOISE_N, 5, RECOVERY_AMBIENT, seed=105)
    scale = float(np.std(base.data))
    cloud = PointCloud(data=base.data / scale)
    config = SamplingConfig(n_tokens=NOISE_N, n_neighbors=NOISE_L, seed=0)
    reports = noise_sweep(
        cloud, sigmas=NOISE_SIGMAS, seeds=NOISE_SEEDS, config=config
    )
    clean_summary = summarize(local_twonn(cloud, config).values)
    by_seed: dict[int, list] = {s: [] for s in NOISE_SEEDS}
    for report in reports:
        by_seed[report.seed].append(report)
    hausdorff_ok = True
    zero_ok = True
    monotone_seeds = 0
    for seed, arm in by_seed.items():
        arm.sort(key=lambda r: r.sigma)
        h_values = [r.hausdorff for r in arm]
        hausdorff_ok &= all(b > a for a, b in zip(h_values, h_values[1:]))
        zero = arm[0]
        zero_ok &= (
            zero.hausdorff == 0.0
            and zero.delta_mean == 0.0
            and zero.summary == clean_summary
        )
        stds = [r.summary.std for r in arm]
        if all(b >= a for a, b in zip(stds, stds[1:])):
            monotone_seeds += 1
    ok = hausdorff_ok and zero_ok and monotone_seeds * 2 > len(NOISE_SEEDS)
    detail = (
        f"hausdorff strictly increasing: {hausdorff_ok}; "
        f"zero-noise arm identical: {zero_ok}; "
        f"std non-decreasing for {monotone_seeds}/{len(NOISE_SEEDS)} seeds"
    )
    return _finish("noise-robustness", started, ok, detail)


def check_invariance() -> CheckResult:
    """Local estimates survive rescaling and rigid motion."""
    started = time.perf_counter()
    n, ambient = 4000, 64
    base = hypercube_cloud(n, 3, ambient, seed=5)
    config = SamplingConfig(n_tokens=n, n_neighbors=64, seed=0)
    reference = local_twonn(base, config).values
    rng = make_rng(99, STREAM_SYNTHETIC)
    rotation = random_rotation(ambient, rng)
    translation = rng.standard_normal(ambient)
    transforms = {
        "scale*1e-3": base.data * 1e-3,
        "scale*1e3": base.data * 1e3,
        "isometry": base.data @ rotation.T + translation,
    }
    worst = 0.0
    details = []
    for name, data in transforms.items():
        values = local_twonn(PointCloud(data=data), config).values
        rel = float(np.max(np.abs(values - reference) / np.abs(reference)))
        worst = max(worst, rel)
        details.append(f"{name}: max rel change {rel:.2e}")
    ok = worst <= INVARIANCE_TOL
    return _finish("invariance", started, ok, "; ".join(details))


def check_determinism() -> CheckResult:
    """Identical local estimates on 1 thread and 8 threads."""
    started = time.perf_counter()
    cloud = hypercube_cloud(10_000, 4, 32, seed=11)
    config = SamplingConfig(n_tokens=10_000, n_neighbors=64, seed=0)
    one = local_twonn(cloud, config, threads=1)
    eight = local_twonn(cloud, config, threads=8)
    ok = np.array_equal(one.values, eight.values)
    detail = "bit-identical estimates" if ok else "estimates differ across thread counts"
    return _finish("determinism", started, ok, detail)


def check_saturation() -> CheckResult:
    """With L == n_points every local estimate equals the global one."""
    started = time.perf_counter()
    n = 256
    cloud = hypercube_cloud(n, 3, 16, seed=21)
    details = []
    ok = True
    for estimator in ("linfit", "mle"):
        config = SamplingConfig(n_tokens=n, n_neighbors=n, seed=0)
        local = local_twonn(cloud, config, estimator=estimator)
        global_est = twonn_global(cloud, estimator=estimator)
        rel = float(np.max(np.abs(local.values - global_est) / abs(global_est)))
        ok = ok and rel <= SATURATION_TOL
        details.append(f"{estimator}: max rel gap {rel:.2e}")
    return _finish("saturation", started, ok, "; ".join(details))


def check_track_semantics() -> CheckResult:
    """Minimum and plateau landmarks on constructed checkpoint series."""
    started = time.perf_counter()
    spread = np.linspace(-0.05, 0.05, 41)

    def values(mean: float) -> np.ndarray:
        return mean + spread

    v_means = [9.0, 8.0, 7.0, 8.0, 9.0]
    v_steps = [0, 10, 20, 30, 40]
    v_report = track_checkpoints(
        [(s, values(m)) for s, m in zip(v_steps, v_means)], window=3
    )
    v_ok = v_report.min_step == 20

    p_means = [10.0, 9.0, 8.0, 7.8, 7.9, 7.85, 7.82, 7.84]
    p_steps = list(range(8))
    p_report = track_checkpoints(
        [(s, values(m)) for s, m in zip(p_steps, p_means)], window=5, rel_tol=0.02
    )
    p_ok = p_report.stabilization_step == 7

    ok = v_ok and p_ok
    detail = (
        f"V-series min at {v_report.min_step} (want 20); "
        f"plateau stabilizes at {p_report.stabilization_step} (want 7)"
    )
    return _finish("track-semantics", started, ok, detail)


ALL_CHECKS: dict[str, Callable[[], CheckResult]] = {
    "dimension-recovery": check_dimension_recovery,
    "pareto-oracle": check_pareto_oracle,
    "knn-exactness": check_knn_exactness,
    "heterogeneity": check_heterogeneity,
    "noise-robustness": check_noise_robustness,
    "invariance": check_invariance,
    "determinism": check_determinism,
    "saturation": check_saturation,
    "track-semantics": check_track_semantics,
}


def run_selftest(names: Optional[Sequence[str]] = None) -> list[CheckResult]:
    """Run the named checks (default: all) and return their results."""
    selected = list(ALL_CHECKS) if names is None else list(names)
    unknown = [n for n in selected if n not in ALL_CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; available: {list(ALL_CHECKS)}")
    return [ALL_CHECKS[name]() for name in selected]
