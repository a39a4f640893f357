"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration and request problems
(:class:`ConfigError`, :class:`IdentifiabilityError`, plain ``ValueError``)
exit with 2, numerical failures (:class:`NumericsError` and subclasses)
exit with 3.
"""
from __future__ import annotations


class ConfigError(ValueError):
    """A config file or CLI request is malformed or inconsistent."""


class IdentifiabilityError(ValueError):
    """The requested free-parameter set is not identifiable from the data."""


class NumericsError(RuntimeError):
    """A numerical routine failed to produce a usable result."""


class BracketError(NumericsError):
    """A root-finding bracket does not enclose a sign change."""


class SingularModelError(NumericsError):
    """The model is evaluated at a point where it is singular."""
