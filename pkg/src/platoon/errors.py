"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to so the command layer never
has to special-case library errors.
"""

from __future__ import annotations


class PlatoonError(Exception):
    exit_code = 2


class FormatError(PlatoonError):
    """Input bytes are not a recognisable NPY stream."""


class UnsupportedError(PlatoonError):
    """NPY stream uses a version, dtype or layout we do not read."""


class TruncationError(PlatoonError):
    """NPY payload is shorter than its header promises."""


class ShapeError(PlatoonError):
    pass


class DomainError(PlatoonError):
    """A value lies outside the domain of the physical model."""


class DegenerateError(PlatoonError):
    pass


class EmptyError(PlatoonError):
    pass


class ConfigError(PlatoonError):
    exit_code = 3


class CapError(PlatoonError):
    """Problem size exceeds the enumeration or simulation cap."""

    exit_code = 3
