"""Exception types raised by the lidscope pipeline.

Plain argument mistakes (bad flag values, out-of-range parameters) raise
``ValueError``; everything that can go wrong with actual data flowing
through the pipeline gets a dedicated class below so callers can tell
"you handed me garbage" apart from "the computation cannot proceed".
"""


class LidscopeError(Exception):
    """Base class for all lidscope-specific failures."""


class FormatError(LidscopeError):
    """A binary dump file is structurally invalid (magic, version, size)."""


class DataError(LidscopeError):
    """A payload decoded fine but contains unusable values (NaN/Inf)."""


class MetadataError(LidscopeError):
    """A metadata sidecar is malformed or inconsistent with its dump."""


class DegenerateInputError(LidscopeError):
    """An input is too collapsed for the requested computation."""


class DegenerateFitError(LidscopeError):
    """A fit has no information to work with (e.g. zero-variance ratios)."""


class AlignmentError(LidscopeError):
    """Two collections that must be index-aligned are not."""
