"""Transformer hidden-state extraction into point-cloud dumps.

Reads a text corpus, runs a pretrained transformer checkpoint over a
seeded subsample of its sequences, and writes every content token's
hidden state at the requested layers as binary point-cloud dumps with
token-metadata sidecars -- the input format of the dimension-analysis
engine.
"""

from .corpus import read_corpus, select_sequences
from .dump import save_dump
from .errors import ExtractError, JobError
from .extract import JobReport, run_job
from .job import ExtractionJob, load_job

__all__ = [
    "ExtractError",
    "ExtractionJob",
    "JobError",
    "JobReport",
    "load_job",
    "read_corpus",
    "run_job",
    "save_dump",
    "select_sequences",
]

__version__ = "0.1.0"
