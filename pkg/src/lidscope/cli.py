"""Command-line interface.

Seven subcommands over the library: ``estimate`` (one dump through the
sampled local pipeline), ``compare`` (two cohorts side by side), ``sweep``
(sampling-parameter grid), ``noise`` (Gaussian perturbation arms),
``layers`` (per-layer profile), ``track`` (checkpoint series) and
``selftest`` (built-in verification suite).

Every run resolves its parameters from, in order of precedence, explicit
command-line flags, a ``--config`` JSON file, the environment
(``LIDSCOPE_THREADS``), and the documented defaults -- then writes the
fully resolved parameter set as ``config.json`` next to its outputs, so
any run can be reproduced byte-for-byte from its own artifacts.

Exit codes: 0 on success, 1 for pipeline failures (bad files, degenerate
data), 2 for usage errors.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import click
import numpy as np
from click.core import ParameterSource

from . import svgplot
from .analysis import (
    LayerRow,
    NoiseReport,
    SweepResult,
    compare_cohorts,
    layer_profile,
    noise_sweep,
    sensitivity_sweep,
    track_checkpoints,
)
from .errors import LidscopeError
from .pointcloud import (
    PointCloud,
    SamplingConfig,
    deduplicate,
    load_point_cloud,
)
from .selftest import ALL_CHECKS, run_selftest
from .twonn import ESTIMATORS, LocalEstimates, local_twonn, summarize

logger = logging.getLogger(__name__)

_SUMMARY_FIELDS = ("count", "mean", "std", "median", "q1", "q3")


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form; identical runs, identical text."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# Parameter resolution


def _load_config_file(path: str, command: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise click.ClickException(f"config {path} must hold a JSON object")
    stated = raw.get("command")
    if stated is not None and stated != command:
        raise click.ClickException(
            f"config {path} was written by {stated!r}, not {command!r}"
        )
    return raw


def _resolve(ctx: click.Context, command: str, values: dict[str, Any]) -> dict:
    """Merge CLI flags over config-file values over defaults."""
    config_path = values.pop("config", None)
    file_cfg = _load_config_file(config_path, command) if config_path else {}
    resolved: dict[str, Any] = {"command": command}
    for key, cli_value in values.items():
        source = ctx.get_parameter_source(key)
        if source == ParameterSource.COMMANDLINE:
            resolved[key] = cli_value
        elif key in file_cfg:
            resolved[key] = file_cfg[key]
        else:
            resolved[key] = cli_value
    threads = resolved.get("threads")
    if threads is None:
        env = os.environ.get("LIDSCOPE_THREADS", "")
        try:
            resolved["threads"] = int(env) if env else 1
        except ValueError:
            raise click.ClickException(
                f"LIDSCOPE_THREADS must be an integer, got {env!r}"
            ) from None
    return resolved


def _sampling_config(resolved: dict) -> SamplingConfig:
    return SamplingConfig(
        n_tokens=int(resolved["tokens"]),
        n_neighbors=int(resolved["neighbors"]),
        seed=int(resolved["seed"]),
    )


def _parse_mapping(
    pairs: Sequence[str], what: str, key_type: Callable[[str], Any] = str
) -> dict:
    """Parse repeated KEY=PATH options into an ordered mapping."""
    mapping: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key or not value:
            raise click.BadParameter(f"expected {what} as KEY=PATH, got {pair!r}")
        try:
            parsed = key_type(key)
        except ValueError:
            raise click.BadParameter(f"bad {what} key {key!r} in {pair!r}") from None
        if parsed in mapping:
            raise click.BadParameter(f"duplicate {what} key {key!r}")
        mapping[parsed] = value
    return mapping


def _parse_number_list(text: Any, cast: Callable[[str], Any], what: str) -> list:
    if isinstance(text, (list, tuple)):
        items = [str(piece) for piece in text]
    else:
        items = [piece.strip() for piece in str(text).split(",") if piece.strip()]
    if not items:
        raise click.BadParameter(f"{what} list is empty")
    try:
        return [cast(piece) for piece in items]
    except ValueError:
        raise click.BadParameter(f"bad {what} list {text!r}") from None


# ---------------------------------------------------------------------------
# Output emission


class _Emitter:
    """Collects output files so a failing run can remove its partials."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.written.append(path)
        return path

    def write_json(self, name: str, payload: Any) -> None:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        self.path(name).write_text(text, encoding="utf-8")

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
        lines = [",".join(header)]
        lines.extend(",".join(row) for row in rows)
        self.path(name).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def discard_partials(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)


def _run_command(ctx: click.Context, out_dir: str, work: Callable[[_Emitter], None]) -> None:
    """Execute a command body with cleanup-on-failure and exit-code mapping."""
    emitter = _Emitter(Path(out_dir))
    try:
        work(emitter)
    except (LidscopeError, OSError, ValueError) as exc:
        emitter.discard_partials()
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)


def _summary_cells(summary) -> list[str]:
    d = summary.to_dict()
    return [str(d["count"])] + [_fmt(d[k]) for k in _SUMMARY_FIELDS[1:]]


def _write_estimates_csv(emitter: _Emitter, name: str, values: np.ndarray) -> None:
    rows = [[str(i), _fmt(v)] for i, v in enumerate(values)]
    emitter.write_csv(name, ("row", "estimate"), rows)


def _read_estimates_csv(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["row", "estimate"]:
            raise LidscopeError(
                f"{path}: expected an estimates CSV with header 'row,estimate'"
            )
        values = [float(row[1]) for row in reader if row]
    if not values:
        raise LidscopeError(f"{path}: no estimate rows")
    return np.asarray(values, dtype=np.float64)


def _load_pipeline_cloud(path: str) -> tuple[PointCloud, dict]:
    """Load a dump and deduplicate it, reporting the counts."""
    cloud = load_point_cloud(path)
    deduped = deduplicate(cloud)
    info = {
        "n_points_loaded": cloud.n_points,
        "n_points_after_dedup": deduped.n_points,
    }
    return deduped, info


def _pipeline_estimates(
    cloud: PointCloud, resolved: dict
) -> tuple[LocalEstimates, bool]:
    config = _sampling_config(resolved)
    saturated = config.n_tokens >= cloud.n_points
    if saturated:
        logger.warning(
            "requested %d tokens but only %d points are available; "
            "using every point",
            config.n_tokens,
            cloud.n_points,
        )
    est = local_twonn(
        cloud,
        config,
        estimator=str(resolved["estimator"]),
        discard_fraction=float(resolved["discard_fraction"]),
        threads=int(resolved["threads"]),
    )
    return est, saturated


# ---------------------------------------------------------------------------
# Shared option groups


def _sampling_options(fn):
    for option in reversed(
        (
            click.option(
                "--tokens",
                type=int,
                default=60_000,
                show_default=True,
                help="Token subsample size N.",
            ),
            click.option(
                "--neighbors",
                type=int,
                default=128,
                show_default=True,
                help="Neighbourhood size L for local estimates.",
            ),
            click.option(
                "--seed",
                type=int,
                default=0,
                show_default=True,
                help="Seed for all sampling decisions.",
            ),
            click.option(
                "--estimator",
                type=click.Choice(ESTIMATORS),
                default="linfit",
                show_default=True,
                help="Dimension estimator.",
            ),
            click.option(
                "--discard-fraction",
                type=float,
                default=0.1,
                show_default=True,
                help="Fraction of the largest ratios dropped by the linear fit.",
            ),
            click.option(
                "--threads",
                type=int,
                default=None,
                help="Worker threads (default: $LIDSCOPE_THREADS, then 1).",
            ),
        )
    ):
        fn = option(fn)
    return fn


def _common_options(fn):
    fn = click.option(
        "--out",
        type=click.Path(file_okay=False),
        default="lidscope_out",
        show_default=True,
        help="Output directory.",
    )(fn)
    fn = click.option(
        "--config",
        type=click.Path(dir_okay=False),
        default=None,
        help="JSON config file; explicit flags override its values.",
    )(fn)
    return fn


# ---------------------------------------------------------------------------
# Commands


@click.group(invoke_without_command=True)
@click.version_option()
@click.pass_context
def main(ctx: click.Context) -> None:
    """Local intrinsic dimension analysis of embedding point clouds."""
    logging.basicConfig(
        level=logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
        ctx.exit(2)


@main.command()
@click.option("--input", "-i", "input_path", type=str, default=None, help="Point-cloud dump file.")
@_sampling_options
@_common_options
@click.pass_context
def estimate(ctx: click.Context, **params) -> None:
    """Local dimension estimates for one embedding dump."""
    resolved = _resolve(ctx, "estimate", params)
    if not resolved.get("input_path"):
        raise click.UsageError("an input dump is required (--input or config)")

    def work(emitter: _Emitter) -> None:
        cloud, info = _load_pipeline_cloud(resolved["input_path"])
        est, saturated = _pipeline_estimates(cloud, resolved)
        summary = summarize(est.values)
        _write_estimates_csv(emitter, "estimates.csv", est.values)
        emitter.write_json(
            "summary.json",
            {
                "summary": summary.to_dict(),
                **info,
                "n_points_estimated": int(est.values.shape[0]),
                "n_degenerate": est.n_degenerate,
                "saturated": saturated,
            },
        )
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


@main.command()
@click.option("--input-a", type=str, default=None, help="First dump (pipeline mode).")
@click.option("--input-b", type=str, default=None, help="Second dump (pipeline mode).")
@click.option("--estimates-a", type=str, default=None, help="First estimates CSV.")
@click.option("--estimates-b", type=str, default=None, help="Second estimates CSV.")
@click.option("--label-a", type=str, default="a", show_default=True)
@click.option("--label-b", type=str, default="b", show_default=True)
@_sampling_options
@_common_options
@click.pass_context
def compare(ctx: click.Context, **params) -> None:
    """Compare two estimate cohorts (dumps or estimate CSVs)."""
    resolved = _resolve(ctx, "compare", params)
    dump_mode = bool(resolved.get("input_a") or resolved.get("input_b"))
    file_mode = bool(resolved.get("estimates_a") or resolved.get("estimates_b"))
    if dump_mode == file_mode:
        raise click.UsageError(
            "give either --input-a/--input-b dumps or "
            "--estimates-a/--estimates-b CSV files"
        )
    if dump_mode and not (resolved.get("input_a") and resolved.get("input_b")):
        raise click.UsageError("dump mode needs both --input-a and --input-b")
    if file_mode and not (resolved.get("estimates_a") and resolved.get("estimates_b")):
        raise click.UsageError("file mode needs both --estimates-a and --estimates-b")

    def work(emitter: _Emitter) -> None:
        config = _sampling_config(resolved)
        if dump_mode:
            cloud_a, _ = _load_pipeline_cloud(resolved["input_a"])
            cloud_b, _ = _load_pipeline_cloud(resolved["input_b"])
            est_a, _ = _pipeline_estimates(cloud_a, resolved)
            est_b, _ = _pipeline_estimates(cloud_b, resolved)
        else:
            est_a = LocalEstimates(
                values=_read_estimates_csv(resolved["estimates_a"]), params=config
            )
            est_b = LocalEstimates(
                values=_read_estimates_csv(resolved["estimates_b"]), params=config
            )
        report = compare_cohorts(
            est_a,
            est_b,
            label_a=str(resolved["label_a"]),
            label_b=str(resolved["label_b"]),
        )
        rows = [
            [report.label_a, _fmt(v)] for v in est_a.values
        ] + [
            [report.label_b, _fmt(v)] for v in est_b.values
        ]
        emitter.write_csv("compare.csv", ("model", "estimate"), rows)
        emitter.write_json("compare.json", report.to_dict())
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


@main.command()
@click.option(
    "--input",
    "-i",
    "inputs",
    type=str,
    multiple=True,
    help="Dump as LABEL=PATH; repeat per split.",
)
@click.option("--m-list", type=str, default=None, help="Comma-separated sequence counts M.")
@click.option("--n-list", type=str, default="60000", show_default=True, help="Comma-separated token counts N.")
@click.option("--l-list", type=str, default="128", show_default=True, help="Comma-separated neighbourhood sizes L.")
@click.option("--seeds", type=str, default="0", show_default=True, help="Comma-separated seeds.")
@click.option(
    "--estimator", type=click.Choice(ESTIMATORS), default="linfit", show_default=True
)
@click.option("--discard-fraction", type=float, default=0.1, show_default=True)
@click.option("--threads", type=int, default=None)
@_common_options
@click.pass_context
def sweep(ctx: click.Context, **params) -> None:
    """Sensitivity grid over sequences, tokens, neighbours and seeds."""
    resolved = _resolve(ctx, "sweep", params)
    if isinstance(resolved.get("inputs"), (list, tuple)):
        resolved["inputs"] = _parse_mapping(resolved["inputs"], "input")
    if not resolved.get("inputs"):
        raise click.UsageError("at least one --input LABEL=PATH is required")
    m_values: list[Optional[int]]
    if resolved.get("m_list"):
        m_values = _parse_number_list(resolved["m_list"], int, "M")
    else:
        m_values = [None]
    n_values = _parse_number_list(resolved["n_list"], int, "N")
    l_values = _parse_number_list(resolved["l_list"], int, "L")
    seeds = _parse_number_list(resolved["seeds"], int, "seed")

    def work(emitter: _Emitter) -> None:
        clouds = {
            label: _load_pipeline_cloud(path)[0]
            for label, path in resolved["inputs"].items()
        }
        result = sensitivity_sweep(
            clouds,
            m_values=m_values,
            n_values=n_values,
            l_values=l_values,
            seeds=seeds,
            estimator=str(resolved["estimator"]),
            discard_fraction=float(resolved["discard_fraction"]),
            threads=int(resolved["threads"]),
        )
        header = (
            "split",
            "m_sequences",
            "n_tokens",
            "n_neighbors",
            "seed",
        ) + _SUMMARY_FIELDS
        rows = []
        for row in result.rows:
            rows.append(
                [
                    row.split,
                    "" if row.m_sequences is None else str(row.m_sequences),
                    str(row.n_tokens),
                    str(row.n_neighbors),
                    str(row.seed),
                ]
                + _summary_cells(row.summary)
            )
        emitter.write_csv("sweep.csv", header, rows)
        emitter.write_json(
            "sweep.json",
            {
                "rows": [r.to_dict() for r in result.rows],
                "failures": [f.to_dict() for f in result.failures],
            },
        )
        emitter.write_json("failures.json", [f.to_dict() for f in result.failures])
        _sweep_chart(emitter, result)
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


def _sweep_chart(emitter: _Emitter, result: SweepResult) -> None:
    groups: dict[tuple, list[float]] = {}
    for row in result.rows:
        key = (row.split, row.m_sequences, row.n_tokens, row.n_neighbors)
        groups.setdefault(key, []).append(row.summary.mean)
    boxes = []
    for (split, m, n, l_value), means in groups.items():
        arr = np.asarray(means)
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
        label = f"{split} M={'all' if m is None else m} N={n} L={l_value}"
        boxes.append(
            (label, float(arr.min()), float(q1), float(med), float(q3), float(arr.max()))
        )
    if boxes:
        svgplot.box_chart(
            emitter.path("sweep.svg"),
            boxes,
            title="Mean local estimate across sampling grid (box over seeds)",
            y_label="mean local estimate",
        )


@main.command()
@click.option("--input", "-i", "input_path", type=str, default=None, help="Point-cloud dump file.")
@click.option(
    "--sigmas",
    type=str,
    default="0,0.001,0.002,0.004,0.01",
    show_default=True,
    help="Comma-separated noise levels.",
)
@click.option(
    "--noise-seeds",
    type=str,
    default="0,1,2,3,4",
    show_default=True,
    help="Comma-separated noise seeds.",
)
@click.option(
    "--hausdorff-subsample",
    type=int,
    default=None,
    help="Approximate the Hausdorff distance on at most this many points.",
)
@_sampling_options
@_common_options
@click.pass_context
def noise(ctx: click.Context, **params) -> None:
    """Response of local estimates to added Gaussian noise."""
    resolved = _resolve(ctx, "noise", params)
    if not resolved.get("input_path"):
        raise click.UsageError("an input dump is required (--input or config)")
    sigmas = _parse_number_list(resolved["sigmas"], float, "sigma")
    noise_seeds = _parse_number_list(resolved["noise_seeds"], int, "noise seed")

    def work(emitter: _Emitter) -> None:
        cloud, _ = _load_pipeline_cloud(resolved["input_path"])
        reports = noise_sweep(
            cloud,
            sigmas=sigmas,
            seeds=noise_seeds,
            config=_sampling_config(resolved),
            estimator=str(resolved["estimator"]),
            discard_fraction=float(resolved["discard_fraction"]),
            threads=int(resolved["threads"]),
            hausdorff_subsample=resolved.get("hausdorff_subsample"),
        )
        header = ("sigma", "seed", "hausdorff", "delta_mean") + _SUMMARY_FIELDS
        rows = [
            [_fmt(r.sigma), str(r.seed), _fmt(r.hausdorff), _fmt(r.delta_mean)]
            + _summary_cells(r.summary)
            for r in reports
        ]
        emitter.write_csv("noise.csv", header, rows)
        emitter.write_json("noise.json", [r.to_dict() for r in reports])
        emitter.write_json("failures.json", [])
        _noise_chart(emitter, reports)
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


def _noise_chart(emitter: _Emitter, reports: Sequence[NoiseReport]) -> None:
    by_sigma: dict[float, list[NoiseReport]] = {}
    for report in reports:
        by_sigma.setdefault(report.sigma, []).append(report)
    sigmas = sorted(by_sigma)
    mean_h = [float(np.mean([r.hausdorff for r in by_sigma[s]])) for s in sigmas]
    mean_mean = [float(np.mean([r.summary.mean for r in by_sigma[s]])) for s in sigmas]
    mean_std = [float(np.mean([r.summary.std for r in by_sigma[s]])) for s in sigmas]
    svgplot.line_chart(
        emitter.path("noise.svg"),
        [
            ("hausdorff (seed mean)", sigmas, mean_h),
            ("mean estimate (seed mean)", sigmas, mean_mean),
            ("estimate std (seed mean)", sigmas, mean_std),
        ],
        title="Perturbation response",
        x_label="noise sigma",
        y_label="value",
    )


@main.command()
@click.option(
    "--input",
    "-i",
    "inputs",
    type=str,
    multiple=True,
    help="Dump as LAYER=PATH; repeat per layer (negative indices allowed).",
)
@_sampling_options
@_common_options
@click.pass_context
def layers(ctx: click.Context, **params) -> None:
    """Local-estimate profile across model layers."""
    resolved = _resolve(ctx, "layers", params)
    if isinstance(resolved.get("inputs"), (list, tuple)):
        resolved["inputs"] = {
            str(k): v
            for k, v in _parse_mapping(resolved["inputs"], "layer", int).items()
        }
    if not resolved.get("inputs"):
        raise click.UsageError("at least one --input LAYER=PATH is required")

    def work(emitter: _Emitter) -> None:
        clouds: dict[int, PointCloud] = {}
        failures = []
        for layer_str, path in resolved["inputs"].items():
            layer = int(layer_str)
            try:
                clouds[layer], _ = _load_pipeline_cloud(path)
            except (LidscopeError, OSError) as exc:
                failures.append({"layer": layer, "path": path, "error": str(exc)})
                logger.warning("layer %d dump %s skipped: %s", layer, path, exc)
        if not clouds:
            raise LidscopeError("no layer dump could be loaded")
        rows = layer_profile(
            clouds,
            _sampling_config(resolved),
            estimator=str(resolved["estimator"]),
            discard_fraction=float(resolved["discard_fraction"]),
            threads=int(resolved["threads"]),
        )
        header = ("layer",) + _SUMMARY_FIELDS
        emitter.write_csv(
            "layers.csv",
            header,
            [[str(r.layer)] + _summary_cells(r.summary) for r in rows],
        )
        emitter.write_json(
            "layers.json",
            {"rows": [r.to_dict() for r in rows], "failures": failures},
        )
        emitter.write_json("failures.json", failures)
        _layers_chart(emitter, rows)
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


def _layers_chart(emitter: _Emitter, rows: Sequence[LayerRow]) -> None:
    xs = [float(r.layer) for r in rows]
    svgplot.line_chart(
        emitter.path("layers.svg"),
        [
            ("mean", xs, [r.summary.mean for r in rows]),
            ("median", xs, [r.summary.median for r in rows]),
        ],
        title="Local estimate by layer",
        x_label="layer",
        y_label="local dimension estimate",
    )


@main.command()
@click.option(
    "--checkpoint",
    "checkpoints",
    type=str,
    multiple=True,
    help="Dump as STEP=PATH; repeat per checkpoint.",
)
@click.option("--metrics", "metrics_path", type=str, default=None, help="CSV of step,metric columns.")
@click.option("--window", type=int, default=5, show_default=True, help="Plateau window length.")
@click.option("--rel-tol", type=float, default=0.02, show_default=True, help="Plateau relative range tolerance.")
@click.option("--label", type=str, default="", help="Series label.")
@_sampling_options
@_common_options
@click.pass_context
def track(ctx: click.Context, **params) -> None:
    """Local-estimate summaries across training checkpoints."""
    resolved = _resolve(ctx, "track", params)
    if isinstance(resolved.get("checkpoints"), (list, tuple)):
        resolved["checkpoints"] = {
            str(k): v
            for k, v in _parse_mapping(resolved["checkpoints"], "checkpoint", int).items()
        }
    if not resolved.get("checkpoints"):
        raise click.UsageError("at least one --checkpoint STEP=PATH is required")

    def work(emitter: _Emitter) -> None:
        failures = []
        series = []
        for step_str, path in sorted(
            resolved["checkpoints"].items(), key=lambda kv: int(kv[0])
        ):
            step = int(step_str)
            try:
                cloud, _ = _load_pipeline_cloud(path)
                est, _ = _pipeline_estimates(cloud, resolved)
                series.append((step, est.values))
            except (LidscopeError, OSError) as exc:
                failures.append({"step": step, "path": path, "error": str(exc)})
                logger.warning("checkpoint %d dump %s skipped: %s", step, path, exc)
        if not series:
            raise LidscopeError("no checkpoint dump could be processed")
        metrics = None
        if resolved.get("metrics_path"):
            metrics = _read_metrics_csv(resolved["metrics_path"])
        report = track_checkpoints(
            series,
            metrics=metrics,
            window=int(resolved["window"]),
            rel_tol=float(resolved["rel_tol"]),
            label=str(resolved["label"]),
        )
        metric_names = sorted(
            {name for point in report.series.points for name in point.metrics}
        )
        header = ("step",) + _SUMMARY_FIELDS + tuple(metric_names)
        rows = []
        for point in report.series.points:
            cells = [str(point.step)] + _summary_cells(point.summary)
            for name in metric_names:
                value = point.metrics.get(name)
                cells.append("" if value is None else _fmt(value))
            rows.append(cells)
        emitter.write_csv("track.csv", header, rows)
        emitter.write_json(
            "track.json", {**report.to_dict(), "failures": failures}
        )
        emitter.write_json("failures.json", failures)
        steps = [float(p.step) for p in report.series.points]
        svgplot.line_chart(
            emitter.path("track.svg"),
            [
                ("mean", steps, [p.summary.mean for p in report.series.points]),
                ("median", steps, [p.summary.median for p in report.series.points]),
            ],
            title="Local estimate across checkpoints",
            x_label="step",
            y_label="local dimension estimate",
        )
        emitter.write_json("config.json", resolved)

    _run_command(ctx, resolved["out"], work)


def _read_metrics_csv(path: str) -> dict[int, dict[str, float]]:
    metrics: dict[int, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "step":
            raise LidscopeError(
                f"{path}: expected a metrics CSV whose first column is 'step'"
            )
        names = [name.strip() for name in header[1:]]
        for row in reader:
            if not row:
                continue
            try:
                step = int(row[0])
                values = {
                    name: float(cell)
                    for name, cell in zip(names, row[1:])
                    if cell != ""
                }
            except ValueError as exc:
                raise LidscopeError(f"{path}: bad metrics row {row!r}") from exc
            metrics[step] = values
    return metrics


@main.command()
@click.option(
    "--only",
    type=click.Choice(tuple(ALL_CHECKS)),
    multiple=True,
    help="Run a subset of checks.",
)
@click.pass_context
def selftest(ctx: click.Context, only: tuple[str, ...]) -> None:
    """Run the built-in verification suite on synthetic data."""
    results = run_selftest(list(only) if only else None)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        failed += 0 if result.passed else 1
        click.echo(f"{status} {result.name} ({result.seconds:.1f}s): {result.detail}")
    if failed:
        click.echo(f"{failed} of {len(results)} checks failed", err=True)
        ctx.exit(1)
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
