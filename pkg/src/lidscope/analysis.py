"""Downstream analyses over local dimension estimates.

Everything here consumes the primitives from :mod:`lidscope.twonn` and
:mod:`lidscope.pointcloud`: cohort comparisons with a standardized mean
difference, paired per-token deltas, Gaussian perturbation sweeps with
Hausdorff displacement tracking, sampling-parameter sensitivity sweeps,
per-layer profiles, and checkpoint-series tracking with minimum and
plateau detection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AlignmentError, DegenerateFitError, LidscopeError
from .knn import pairwise_distance
from .pointcloud import PointCloud, SamplingConfig, TokenMeta, subsample_tokens
from .rng import (
    STREAM_HAUSDORFF,
    STREAM_NOISE,
    STREAM_SEQUENCES,
    make_rng,
    shuffled_prefix,
)
from .twonn import EstimateSummary, LocalEstimates, local_twonn, summarize

logger = logging.getLogger(__name__)

_HAUSDORFF_BLOCK = 256


# ---------------------------------------------------------------------------
# Cohort comparison


@dataclass(frozen=True)
class ComparisonReport:
    """Two cohorts of local estimates, summarized side by side."""

    label_a: str
    label_b: str
    summary_a: EstimateSummary
    summary_b: EstimateSummary
    delta_mean: float
    smd: float

    def to_dict(self) -> dict:
        return {
            "label_a": self.label_a,
            "label_b": self.label_b,
            "summary_a": self.summary_a.to_dict(),
            "summary_b": self.summary_b.to_dict(),
            "delta_mean": self.delta_mean,
            "smd": self.smd,
        }


def standardized_mean_difference(a: np.ndarray, b: np.ndarray) -> float:
    """Cohen's d with the pooled standard deviation.

    (mean(a) - mean(b)) / s_pooled with
    s_pooled = sqrt(((n_a - 1) s_a^2 + (n_b - 1) s_b^2) / (n_a + n_b - 2)).
    Two constant cohorts at the same value differ by nothing and give 0;
    constant cohorts at different values have an undefined effect size.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size < 2 or b.size < 2:
        raise ValueError(
            f"need at least 2 values per cohort, got {a.size} and {b.size}"
        )
    var_a = float(np.var(a, ddof=1))
    var_b = float(np.var(b, ddof=1))
    pooled = math.sqrt(
        ((a.size - 1) * var_a + (b.size - 1) * var_b) / (a.size + b.size - 2)
    )
    delta = float(np.mean(a) - np.mean(b))
    if pooled == 0.0:
        if delta == 0.0:
            return 0.0
        raise DegenerateFitError(
            "both cohorts are constant but unequal; the standardized "
            "difference is undefined"
        )
    return delta / pooled


def compare_cohorts(
    a: LocalEstimates,
    b: LocalEstimates,
    label_a: str = "a",
    label_b: str = "b",
) -> ComparisonReport:
    """Summaries, mean difference and effect size of two estimate cohorts."""
    if a.params != b.params:
        logger.warning(
            "comparing cohorts with different sampling parameters: %s vs %s",
            a.params,
            b.params,
        )
    return ComparisonReport(
        label_a=label_a,
        label_b=label_b,
        summary_a=summarize(a.values),
        summary_b=summarize(b.values),
        delta_mean=float(np.mean(a.values) - np.mean(b.values)),
        smd=standardized_mean_difference(a.values, b.values),
    )


@dataclass(frozen=True)
class PairedDeltas:
    """Per-token estimate differences, aligned with their token metadata."""

    deltas: np.ndarray
    meta: Optional[tuple[TokenMeta, ...]] = None


def paired_token_compare(
    a: np.ndarray,
    b: np.ndarray,
    meta: Optional[Sequence[TokenMeta]] = None,
) -> PairedDeltas:
    """Element-wise a - b for estimate vectors over the *same* token sample.

    The two vectors (and the metadata, if given) must be index-aligned:
    entry i of each refers to the same token.  Alignment is the caller's
    contract -- typically both cohorts come from pipelines run with
    identical sampling parameters on clouds with identical provenance.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise AlignmentError(
            f"paired cohorts differ in length: {a.shape[0]} vs {b.shape[0]}"
        )
    meta_tuple: Optional[tuple[TokenMeta, ...]] = None
    if meta is not None:
        meta_tuple = tuple(meta)
        if len(meta_tuple) != a.shape[0]:
            raise AlignmentError(
                f"metadata has {len(meta_tuple)} records for "
                f"{a.shape[0]} paired values"
            )
    return PairedDeltas(deltas=a - b, meta=meta_tuple)


# ---------------------------------------------------------------------------
# Perturbation analysis


def add_gaussian_noise(cloud: PointCloud, sigma: float, seed: int) -> PointCloud:
    """Add isotropic N(0, sigma^2) noise to every coordinate.

    sigma == 0 returns the input data untouched (bit-identical), so a
    zero-noise arm of a sweep is exactly the clean pipeline.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0.0:
        return cloud
    rng = make_rng(seed, STREAM_NOISE)
    noise = rng.standard_normal(cloud.data.shape)
    data = cloud.data.astype(np.float64) + sigma * noise
    return PointCloud(data=data, meta=cloud.meta)


def hausdorff(
    a: PointCloud,
    b: PointCloud,
    subsample: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Hausdorff distance between two clouds (exact, or on subsamples).

    max over both directions of the farthest nearest-neighbour distance.
    With ``subsample`` set, clouds larger than that are first reduced by a
    seeded uniform sample and the result is an approximation (logged).
    """
    if a.n_points == 0 or b.n_points == 0:
        raise ValueError("hausdorff distance needs non-empty clouds")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if subsample is not None:
        if subsample < 1:
            raise ValueError(f"subsample must be positive, got {subsample}")
        reduced = False
        if a.n_points > subsample:
            idx = shuffled_prefix(a.n_points, subsample, make_rng(seed, STREAM_HAUSDORFF))
            a = a.take(idx)
            reduced = True
        if b.n_points > subsample:
            idx = shuffled_prefix(b.n_points, subsample, make_rng(seed + 1, STREAM_HAUSDORFF))
            b = b.take(idx)
            reduced = True
        if reduced:
            logger.info(
                "hausdorff: approximating on subsamples of up to %d points",
                subsample,
            )
    xa = np.ascontiguousarray(a.data, dtype=np.float64)
    xb = np.ascontiguousarray(b.data, dtype=np.float64)
    pair_ab = _farthest_nearest_pair(xa, xb)
    pair_ba = _farthest_nearest_pair(xb, xa)
    d_ab = pairwise_distance(xa[pair_ab[0]], xb[pair_ab[1]])
    d_ba = pairwise_distance(xb[pair_ba[0]], xa[pair_ba[1]])
    return max(d_ab, d_ba)


def _farthest_nearest_pair(src: np.ndarray, dst: np.ndarray) -> tuple[int, int]:
    """Index pair realising max over src of the nearest dst point.

    Candidate selection runs on blocked squared distances; the caller
    recomputes the final distance for the winning pair directly, which
    keeps identical clouds at exactly zero.
    """
    sq_src = np.einsum("ij,ij->i", src, src)
    sq_dst = np.einsum("ij,ij->i", dst, dst)
    best_val = -1.0
    best_pair = (0, 0)
    for start in range(0, src.shape[0], _HAUSDORFF_BLOCK):
        stop = min(start + _HAUSDORFF_BLOCK, src.shape[0])
        d2 = (
            sq_src[start:stop, None]
            + sq_dst[None, :]
            - 2.0 * (src[start:stop] @ dst.T)
        )
        np.maximum(d2, 0.0, out=d2)
        nearest = np.argmin(d2, axis=1)
        rows = np.arange(stop - start)
        vals = d2[rows, nearest]
        local_arg = int(np.argmax(vals))
        if vals[local_arg] > best_val:
            best_val = float(vals[local_arg])
            best_pair = (start + local_arg, int(nearest[local_arg]))
    return best_pair


@dataclass(frozen=True)
class NoiseReport:
    """One arm of a perturbation sweep: (sigma, seed) and its effects."""

    sigma: float
    seed: int
    hausdorff: float
    summary: EstimateSummary
    delta_mean: float  # noisy mean minus clean mean

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "seed": self.seed,
            "hausdorff": self.hausdorff,
            "summary": self.summary.to_dict(),
            "delta_mean": self.delta_mean,
        }


def noise_sweep(
    cloud: PointCloud,
    sigmas: Sequence[float],
    seeds: Sequence[int],
    config: SamplingConfig,
    estimator: str = "linfit",
    discard_fraction: float = 0.1,
    threads: int = 1,
    hausdorff_subsample: Optional[int] = None,
) -> list[NoiseReport]:
    """Local-estimate response to increasing Gaussian perturbation.

    The token subsample is drawn once from the clean cloud; each (sigma,
    seed) arm perturbs that same subsample, so all arms see the same
    points and differences are attributable to the noise alone.
    """
    if not sigmas:
        raise ValueError("sigmas must be non-empty")
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if any(s < 0 for s in sigmas):
        raise ValueError("sigmas must be non-negative")
    clean = subsample_tokens(cloud, config.n_tokens, config.seed)
    clean_est = local_twonn(
        clean, config, estimator=estimator,
        discard_fraction=discard_fraction, threads=threads,
    )
    clean_mean = float(np.mean(clean_est.values))
    reports = []
    for sigma in sigmas:
        for seed in seeds:
            noisy = add_gaussian_noise(clean, float(sigma), int(seed))
            est = local_twonn(
                noisy, config, estimator=estimator,
                discard_fraction=discard_fraction, threads=threads,
            )
            displacement = hausdorff(
                clean, noisy, subsample=hausdorff_subsample, seed=int(seed)
            )
            summary = summarize(est.values)
            reports.append(
                NoiseReport(
                    sigma=float(sigma),
                    seed=int(seed),
                    hausdorff=displacement,
                    summary=summary,
                    delta_mean=summary.mean - clean_mean,
                )
            )
    return reports


# ---------------------------------------------------------------------------
# Sensitivity sweep over sampling parameters


@dataclass(frozen=True)
class SweepRow:
    """One grid cell of a sensitivity sweep."""

    split: str
    m_sequences: Optional[int]
    n_tokens: int
    n_neighbors: int
    seed: int
    summary: EstimateSummary

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "m_sequences": self.m_sequences,
            "n_tokens": self.n_tokens,
            "n_neighbors": self.n_neighbors,
            "seed": self.seed,
            "summary": self.summary.to_dict(),
        }


@dataclass(frozen=True)
class SweepFailure:
    """A grid cell that could not be computed, and why."""

    split: str
    m_sequences: Optional[int]
    n_tokens: int
    n_neighbors: int
    seed: int
    error: str

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "m_sequences": self.m_sequences,
            "n_tokens": self.n_tokens,
            "n_neighbors": self.n_neighbors,
            "seed": self.seed,
            "error": self.error,
        }


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...] = field(default_factory=tuple)
    failures: tuple[SweepFailure, ...] = field(default_factory=tuple)


def select_sequences(cloud: PointCloud, m_sequences: int, seed: int) -> PointCloud:
    """Keep the points of a seeded sample of m distinct sequences.

    The distinct sequence ids are shuffled with a fixed seed and truncated
    to the first m, so for one seed a smaller m selects a subset of the
    sequences a larger m selects.  Asking for at least as many sequences
    as exist returns the cloud unchanged.
    """
    if m_sequences < 1:
        raise ValueError(f"m_sequences must be positive, got {m_sequences}")
    if cloud.meta is None:
        raise ValueError("sequence selection needs token metadata")
    seq_ids = np.array([m.seq_id for m in cloud.meta], dtype=np.int64)
    distinct = np.unique(seq_ids)
    if m_sequences >= distinct.shape[0]:
        return cloud
    order = shuffled_prefix(
        distinct.shape[0], m_sequences, make_rng(seed, STREAM_SEQUENCES)
    )
    chosen = distinct[order]
    mask = np.isin(seq_ids, chosen)
    return cloud.take(np.flatnonzero(mask))


def sensitivity_sweep(
    clouds: dict[str, PointCloud],
    m_values: Sequence[Optional[int]],
    n_values: Sequence[int],
    l_values: Sequence[int],
    seeds: Sequence[int],
    estimator: str = "linfit",
    discard_fraction: float = 0.1,
    threads: int = 1,
) -> SweepResult:
    """Full grid of (split, M sequences, N tokens, L neighbours, seed).

    Every cell reruns the sampled local pipeline with its own parameters.
    A cell that fails (e.g. L exceeding the sampled cloud) is recorded as
    a failure and the sweep continues; an ``m`` of None skips sequence
    subsetting for that cell.
    """
    if not clouds:
        raise ValueError("no input clouds given")
    rows: list[SweepRow] = []
    failures: list[SweepFailure] = []
    for split, cloud in clouds.items():
        for m in m_values:
            for seed in seeds:
                base = cloud
                m_label = None if m is None else int(m)
                if m is not None:
                    if cloud.meta is None:
                        logger.warning(
                            "split %r has no token metadata; "
                            "using all sequences for m=%s",
                            split,
                            m,
                        )
                    else:
                        base = select_sequences(cloud, int(m), int(seed))
                for n in n_values:
                    for l_value in l_values:
                        try:
                            cfg = SamplingConfig(
                                n_tokens=int(n),
                                n_neighbors=int(l_value),
                                seed=int(seed),
                            )
                            est = local_twonn(
                                base,
                                cfg,
                                estimator=estimator,
                                discard_fraction=discard_fraction,
                                threads=threads,
                            )
                            rows.append(
                                SweepRow(
                                    split=split,
                                    m_sequences=m_label,
                                    n_tokens=int(n),
                                    n_neighbors=int(l_value),
                                    seed=int(seed),
                                    summary=summarize(est.values),
                                )
                            )
                        except (LidscopeError, ValueError) as exc:
                            failures.append(
                                SweepFailure(
                                    split=split,
                                    m_sequences=m_label,
                                    n_tokens=int(n),
                                    n_neighbors=int(l_value),
                                    seed=int(seed),
                                    error=str(exc),
                                )
                            )
    return SweepResult(rows=tuple(rows), failures=tuple(failures))


# ---------------------------------------------------------------------------
# Layer profiles


@dataclass(frozen=True)
class LayerRow:
    layer: int
    summary: EstimateSummary

    def to_dict(self) -> dict:
        return {"layer": self.layer, "summary": self.summary.to_dict()}


def layer_profile(
    clouds: dict[int, PointCloud],
    config: SamplingConfig,
    estimator: str = "linfit",
    discard_fraction: float = 0.1,
    threads: int = 1,
) -> list[LayerRow]:
    """Local-estimate summary per model layer, sorted by layer index."""
    if not clouds:
        raise ValueError("no layer clouds given")
    rows = []
    for layer in sorted(clouds):
        est = local_twonn(
            clouds[layer],
            config,
            estimator=estimator,
            discard_fraction=discard_fraction,
            threads=threads,
        )
        rows.append(LayerRow(layer=int(layer), summary=summarize(est.values)))
    return rows


# ---------------------------------------------------------------------------
# Checkpoint tracking


@dataclass(frozen=True)
class CheckpointPoint:
    step: int
    summary: EstimateSummary
    metrics: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "summary": self.summary.to_dict(),
            "metrics": dict(self.metrics),
        }


@dataclass(frozen=True)
class CheckpointSeries:
    label: str
    points: tuple[CheckpointPoint, ...]


@dataclass(frozen=True)
class TrackReport:
    """Checkpoint series with its minimum and plateau landmarks.

    ``min_step`` is the step with the lowest mean estimate (first such
    step on ties).  ``stabilization_step`` is the first step whose
    trailing window of means has a relative range below the tolerance, or
    None if the series never settles.
    """

    series: CheckpointSeries
    min_step: int
    stabilization_step: Optional[int]

    def to_dict(self) -> dict:
        return {
            "label": self.series.label,
            "points": [p.to_dict() for p in self.series.points],
            "min_step": self.min_step,
            "stabilization_step": self.stabilization_step,
        }


def track_checkpoints(
    series: Sequence[tuple[int, np.ndarray]],
    metrics: Optional[dict[int, dict[str, float]]] = None,
    window: int = 5,
    rel_tol: float = 0.02,
    label: str = "",
) -> TrackReport:
    """Summarize local estimates across training checkpoints.

    ``series`` holds (step, estimate values) pairs with strictly
    increasing steps.  External metrics keyed by step (loss, accuracy...)
    are joined onto each point when given.
    """
    if not series:
        raise ValueError("checkpoint series is empty")
    if window < 2:
        raise ValueError(f"window must be at least 2, got {window}")
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    steps = [int(step) for step, _ in series]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError(f"checkpoint steps must be strictly increasing, got {steps}")
    points = tuple(
        CheckpointPoint(
            step=int(step),
            summary=summarize(values),
            metrics=dict((metrics or {}).get(int(step), {})),
        )
        for step, values in series
    )
    means = np.array([p.summary.mean for p in points])
    min_step = steps[int(np.argmin(means))]
    stabilization_step: Optional[int] = None
    for end in range(window - 1, len(means)):
        win = means[end - window + 1 : end + 1]
        spread = float(win.max() - win.min())
        denom = float(np.mean(np.abs(win)))
        if denom == 0.0:
            settled = spread == 0.0
        else:
            settled = spread / denom < rel_tol
        if settled:
            stabilization_step = steps[end]
            break
    return TrackReport(
        series=CheckpointSeries(label=label, points=points),
        min_step=min_step,
        stabilization_step=stabilization_step,
    )
