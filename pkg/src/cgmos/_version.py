"""Single source of the package version string embedded in artifacts."""

__version__ = "0.1.0"
