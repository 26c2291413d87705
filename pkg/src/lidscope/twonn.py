"""Two-nearest-neighbour intrinsic dimension estimation.

The estimator looks only at the ratio mu = r2/r1 of each point's second to
first nearest-neighbour distance.  On a locally uniform d-dimensional
manifold these ratios follow a Pareto distribution with shape d, so d can
be recovered either from a zero-intercept linear fit of -log(1 - F(mu))
against log(mu) on the empirical CDF, or in closed form as the maximum
likelihood shape n / sum(log mu).

Besides the classic global estimate this module computes *local* estimates:
for every point of a (subsampled) cloud, the estimator runs on the ratio
set of that point's L-member neighbourhood (the point plus its L-1 nearest
neighbours), yielding one dimension value per point.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateFitError, DegenerateInputError
from .knn import knn_exact
from .pointcloud import PointCloud, SamplingConfig, subsample_tokens

logger = logging.getLogger(__name__)

ESTIMATORS = ("linfit", "mle")

_LOCAL_BLOCK = 64


@dataclass(frozen=True)
class RatioSample:
    """Retained neighbour-distance ratios of one cloud or neighbourhood."""

    mus: np.ndarray
    n_used: int
    n_dropped: int

    def __post_init__(self) -> None:
        mus = np.asarray(self.mus, dtype=np.float64).ravel()
        object.__setattr__(self, "mus", mus)
        if self.n_used != mus.shape[0]:
            raise ValueError(
                f"n_used={self.n_used} does not match {mus.shape[0]} ratios"
            )
        if self.n_dropped < 0:
            raise ValueError(f"n_dropped must be non-negative, got {self.n_dropped}")
        if mus.size and (not np.all(np.isfinite(mus)) or mus.min() < 1.0 - 1e-12):
            raise ValueError("ratios must be finite and >= 1")


@dataclass(frozen=True)
class LocalEstimates:
    """Per-point dimension estimates, aligned with the rows of ``cloud``."""

    values: np.ndarray
    params: SamplingConfig
    cloud: Optional[PointCloud] = None
    n_degenerate: int = 0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).ravel()
        object.__setattr__(self, "values", values)
        if self.cloud is not None and self.cloud.n_points != values.shape[0]:
            raise ValueError(
                f"{values.shape[0]} estimates for a "
                f"{self.cloud.n_points}-point cloud"
            )


@dataclass(frozen=True)
class EstimateSummary:
    """Five-number-ish summary of a batch of dimension estimates."""

    count: int
    mean: float
    std: float
    median: float
    q1: float
    q3: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "std": self.std,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
        }


def twonn_ratios(cloud: PointCloud, threads: int = 1) -> RatioSample:
    """Second-to-first neighbour distance ratios of every point.

    Points whose nearest-neighbour distance is zero (exact duplicates) or
    whose ratio is otherwise non-finite are dropped with a warning; if no
    usable ratio survives the input is too collapsed to say anything.
    """
    if cloud.n_points < 3:
        raise ValueError(
            f"need at least 3 points for neighbour ratios, got {cloud.n_points}"
        )
    graph = knn_exact(cloud, 2, include_self=False, threads=threads)
    return _ratios_from_r1r2(graph.distances[:, 0], graph.distances[:, 1])


def _ratios_from_r1r2(r1: np.ndarray, r2: np.ndarray) -> RatioSample:
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(r1 > 0.0, r2 / np.where(r1 > 0.0, r1, 1.0), np.inf)
    keep = np.isfinite(mu)
    mus = mu[keep]
    n_dropped = int(mu.shape[0] - mus.shape[0])
    if n_dropped:
        logger.warning(
            "dropped %d of %d ratio points with zero or non-finite "
            "neighbour distances",
            n_dropped,
            mu.shape[0],
        )
    if mus.size == 0:
        raise DegenerateInputError(
            "no usable neighbour ratios: every point sits on a duplicate"
        )
    return RatioSample(mus=mus, n_used=int(mus.shape[0]), n_dropped=n_dropped)


def _keep_count(n_used: int, discard_fraction: float) -> int:
    """Number of smallest ratios entering the linear fit.

    At least one ratio is always discarded so the empirical CDF never
    reaches 1 (the top point would map to -log(0)).
    """
    return n_used - max(math.ceil(discard_fraction * n_used), 1)


def fit_dimension_linfit(sample: RatioSample, discard_fraction: float = 0.1) -> float:
    """Dimension from a zero-intercept fit on the transformed empirical CDF.

    The retained ratios are sorted ascending and the largest
    ``ceil(discard_fraction * n)`` of them are dropped (they sit in the
    noisy tail of the Pareto distribution).  With F(mu_(i)) = i/n, the
    remaining points are fit through the origin in the coordinates
    x = log(mu_(i)), y = -log(1 - F(mu_(i))); the slope is the dimension.
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError(
            f"discard_fraction must be in [0, 1), got {discard_fraction}"
        )
    n = sample.n_used
    keep = _keep_count(n, discard_fraction)
    if keep < 3:
        raise ValueError(
            f"only {max(keep, 0)} ratios would remain after discarding; "
            f"need at least 3 (n_used={n}, discard_fraction={discard_fraction})"
        )
    mus = np.sort(sample.mus)[:keep]
    ranks = np.arange(1, keep + 1, dtype=np.float64)
    x = np.log(mus)
    y = -np.log1p(-ranks / n)
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise DegenerateFitError(
            "all retained ratios equal 1; the fit has no spread to work with"
        )
    return float(np.dot(x, y) / sxx)


def fit_dimension_mle(sample: RatioSample) -> float:
    """Closed-form maximum-likelihood Pareto shape: n / sum(log mu)."""
    if sample.n_used < 2:
        raise ValueError(f"need at least 2 ratios, got {sample.n_used}")
    total = float(np.sum(np.log(sample.mus)))
    if total <= 0.0:
        raise DegenerateFitError(
            "all ratios equal 1; the likelihood has no finite maximiser"
        )
    return sample.n_used / total


def _fit(sample: RatioSample, estimator: str, discard_fraction: float) -> float:
    if estimator == "linfit":
        return fit_dimension_linfit(sample, discard_fraction)
    if estimator == "mle":
        return fit_dimension_mle(sample)
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")


def twonn_global(
    cloud: PointCloud,
    estimator: str = "linfit",
    discard_fraction: float = 0.1,
    threads: int = 1,
) -> float:
    """Single dimension estimate for a whole cloud."""
    if estimator not in ESTIMATORS:
        raise ValueError(
            f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}"
        )
    sample = twonn_ratios(cloud, threads=threads)
    return _fit(sample, estimator, discard_fraction)


def local_twonn(
    cloud: PointCloud,
    config: SamplingConfig,
    estimator: str = "linfit",
    discard_fraction: float = 0.1,
    threads: int = 1,
) -> LocalEstimates:
    """Per-point dimension estimates from L-member neighbourhoods.

    The cloud is first reduced to ``config.n_tokens`` points by seeded
    subsampling (a cloud at or below that size is used as-is).  Around each
    remaining point v the estimator runs on the neighbour ratios *within*
    the neighbourhood {v} + {L-1 nearest neighbours of v}, with
    L = ``config.n_neighbors``, producing one estimate per point, aligned
    with the rows of the returned subsampled cloud.

    A neighbourhood whose ratio set cannot support a fit (duplicates
    everywhere, all ratios equal, too few usable members) yields 0.0 for
    that point; such points are counted in ``n_degenerate`` and reported in
    one summary warning rather than aborting the run.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(
            f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}"
        )
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError(
            f"discard_fraction must be in [0, 1), got {discard_fraction}"
        )
    sub = subsample_tokens(cloud, config.n_tokens, config.seed)
    n = sub.n_points
    L = config.n_neighbors
    if L > n:
        raise ValueError(
            f"n_neighbors={L} exceeds the {n} points available after sampling"
        )
    graph = knn_exact(sub, L - 1, include_self=False, threads=threads)

    points = np.ascontiguousarray(sub.data, dtype=np.float64)
    values = np.empty(n, dtype=np.float64)
    degenerate = np.zeros(n, dtype=bool)

    def run_block(start: int) -> None:
        stop = min(start + _LOCAL_BLOCK, n)
        members = np.concatenate(
            [np.arange(start, stop, dtype=np.int64)[:, None], graph.indices[start:stop]],
            axis=1,
        )  # (B, L) point indices per neighbourhood
        coords = points[members]  # (B, L, dim)
        gram = np.einsum("bld,bmd->blm", coords, coords)
        sq = np.einsum("bld,bld->bl", coords, coords)
        d2 = sq[:, :, None] + sq[:, None, :] - 2.0 * gram
        np.maximum(d2, 0.0, out=d2)
        diag = np.arange(L)
        d2[:, diag, diag] = np.inf
        part = np.partition(d2, (0, 1), axis=2)
        r1 = np.sqrt(part[:, :, 0])
        r2 = np.sqrt(part[:, :, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(r1 > 0.0, r2 / np.where(r1 > 0.0, r1, 1.0), np.inf)
        est, bad = _fit_rows(mu, estimator, discard_fraction)
        values[start:stop] = est
        degenerate[start:stop] = bad

    starts = range(0, n, _LOCAL_BLOCK)
    if threads == 1:
        for start in starts:
            run_block(start)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, starts))

    n_degenerate = int(degenerate.sum())
    if n_degenerate:
        logger.warning(
            "local fits: %d of %d neighbourhoods were degenerate; "
            "their estimates are reported as 0.0",
            n_degenerate,
            n,
        )
    return LocalEstimates(
        values=values, params=config, cloud=sub, n_degenerate=n_degenerate
    )


def _fit_rows(
    mu: np.ndarray, estimator: str, discard_fraction: float
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise dimension fits on a (B, L) ratio matrix with invalid entries.

    Non-finite ratios (from duplicate points inside a neighbourhood) are
    excluded row by row.  Returns (estimates, degenerate_mask); degenerate
    rows carry 0.0.
    """
    b, width = mu.shape
    valid = np.isfinite(mu)
    n_used = valid.sum(axis=1)
    # Sort each row ascending with invalid entries pushed to the end.
    mu_sorted = np.sort(np.where(valid, mu, np.inf), axis=1)
    ranks = np.arange(1, width + 1, dtype=np.float64)

    if estimator == "mle":
        logs = np.where(valid, np.log(np.where(valid, mu, 1.0)), 0.0)
        total = logs.sum(axis=1)
        bad = (n_used < 2) | (total <= 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            est = np.where(bad, 0.0, n_used / np.where(total > 0.0, total, 1.0))
        return est, bad

    keep = n_used - np.maximum(np.ceil(discard_fraction * n_used).astype(np.int64), 1)
    bad = keep < 3
    in_fit = ranks[None, :] <= keep[:, None]  # (B, width)
    x = np.where(in_fit, np.log(np.where(in_fit, mu_sorted, 1.0)), 0.0)
    safe_n = np.maximum(n_used, 1).astype(np.float64)
    cdf = np.where(in_fit, ranks[None, :] / safe_n[:, None], 0.0)
    y = np.where(in_fit, -np.log1p(-cdf), 0.0)
    sxx = np.einsum("ij,ij->i", x, x)
    sxy = np.einsum("ij,ij->i", x, y)
    bad = bad | (sxx == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(bad, 0.0, sxy / np.where(sxx > 0.0, sxx, 1.0))
    return est, bad


def summarize(values: np.ndarray) -> EstimateSummary:
    """Count, mean, sample standard deviation and quartiles of estimates.

    The standard deviation uses the n-1 denominator; for a single value it
    is defined as 0.  Quartiles interpolate linearly between order
    statistics.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot summarize an empty estimate batch")
    if not np.all(np.isfinite(values)):
        raise ValueError("estimates contain non-finite values")
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    q1, median, q3 = (float(q) for q in np.percentile(values, [25.0, 50.0, 75.0]))
    return EstimateSummary(
        count=int(values.size),
        mean=float(np.mean(values)),
        std=std,
        median=median,
        q1=q1,
        q3=q3,
    )
