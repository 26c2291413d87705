"""Command-line entry point: run one extraction job described by a TOML file."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import JobError
from .extract import run_job
from .job import load_job


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lidscope-extract",
        description=(
            "Extract per-token transformer hidden states into point-cloud "
            "dump files that downstream dimension-estimation tools can read."
        ),
    )
    parser.add_argument(
        "--config",
        required=True,
        metavar="JOB_TOML",
        help="path to a TOML job description",
    )
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        job = load_job(args.config)
        report = run_job(job)
    except (JobError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for layer in job.layers:
        print(f"wrote {report.points_per_layer[layer]} points -> {report.files[layer]}")
    print(f"report: {job.out}/job_report.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
