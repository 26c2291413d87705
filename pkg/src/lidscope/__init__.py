"""Local intrinsic dimension estimation for embedding point clouds.

The pipeline: load (or generate) a point cloud, deduplicate, draw a seeded
token subsample, build exact nearest-neighbour neighbourhoods, and run the
two-nearest-neighbour estimator either globally or per neighbourhood to
get one dimension estimate per point.  On top of that sit cohort
comparisons, perturbation sweeps, sampling sensitivity grids, layer
profiles and checkpoint tracking.
"""

from .analysis import (
    CheckpointPoint,
    CheckpointSeries,
    ComparisonReport,
    LayerRow,
    NoiseReport,
    PairedDeltas,
    SweepFailure,
    SweepResult,
    SweepRow,
    TrackReport,
    add_gaussian_noise,
    compare_cohorts,
    hausdorff,
    layer_profile,
    noise_sweep,
    paired_token_compare,
    select_sequences,
    sensitivity_sweep,
    standardized_mean_difference,
    track_checkpoints,
)
from .errors import (
    AlignmentError,
    DataError,
    DegenerateFitError,
    DegenerateInputError,
    FormatError,
    LidscopeError,
    MetadataError,
)
from .knn import NeighborGraph, knn_exact, neighbor_graph_to_csv, pairwise_distance
from .pointcloud import (
    PointCloud,
    SamplingConfig,
    TokenMeta,
    deduplicate,
    load_point_cloud,
    save_point_cloud,
    subsample_tokens,
)
from .rng import make_rng, shuffled_prefix
from .selftest import CheckResult, run_selftest
from .twonn import (
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

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CheckpointPoint",
    "CheckpointSeries",
    "CheckResult",
    "ComparisonReport",
    "DataError",
    "DegenerateFitError",
    "DegenerateInputError",
    "EstimateSummary",
    "FormatError",
    "LayerRow",
    "LidscopeError",
    "LocalEstimates",
    "MetadataError",
    "NeighborGraph",
    "NoiseReport",
    "PairedDeltas",
    "PointCloud",
    "RatioSample",
    "SamplingConfig",
    "SweepFailure",
    "SweepResult",
    "SweepRow",
    "TokenMeta",
    "TrackReport",
    "add_gaussian_noise",
    "compare_cohorts",
    "deduplicate",
    "fit_dimension_linfit",
    "fit_dimension_mle",
    "hausdorff",
    "knn_exact",
    "layer_profile",
    "load_point_cloud",
    "local_twonn",
    "make_rng",
    "neighbor_graph_to_csv",
    "noise_sweep",
    "paired_token_compare",
    "pairwise_distance",
    "run_selftest",
    "save_point_cloud",
    "select_sequences",
    "sensitivity_sweep",
    "shuffled_prefix",
    "standardized_mean_difference",
    "subsample_tokens",
    "summarize",
    "track_checkpoints",
    "twonn_global",
    "twonn_ratios",
]
