"""Exception hierarchy for extraction jobs."""


class ExtractError(Exception):
    """Base class for everything this package raises on purpose."""


class JobError(ExtractError):
    """A job description or its inputs are unusable."""
