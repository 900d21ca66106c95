"""Exception hierarchy shared across the package.

Every error raised on a documented failure path derives from CgmosError so
callers (and the CLI exit-code table) can branch on category rather than on
message text.
"""

from __future__ import annotations


class CgmosError(Exception):
    """Base class for all package errors."""


class ParseError(CgmosError):
    """Malformed input file: bad cell, missing value, ragged row, bad header."""


class ParameterError(CgmosError, ValueError):
    """A hyperparameter or argument is out of its documented range."""


class DegenerateDatasetError(CgmosError):
    """Dataset cannot support the operation: single class, empty class, n too small."""


class InfeasibleError(CgmosError):
    """A requested operation cannot be carried out on this data."""


class InfeasibleStratificationError(InfeasibleError):
    """More folds requested than minority samples available."""


class InfeasibleSynthesisError(InfeasibleError):
    """Too few minority samples to form interpolation neighborhoods."""


class InsufficientDataError(InfeasibleError):
    """Statistical test has too few usable observations (e.g. all-zero diffs)."""


class ZeroCertaintyError(CgmosError):
    """A before-insertion certainty of 0 reached the relative-change path.

    Unreachable when the density model's zero-likelihood fallback is active
    and self terms are included; reaching it signals a density bug or a
    deliberately degenerate configuration.
    """


class VerificationError(CgmosError):
    """A theory check (ratio/gain identity, expected-gain inequality) failed."""
