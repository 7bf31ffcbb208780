"""Semantic exceptions shared across the package."""


class RiskhullError(Exception):
    """Base class for package errors."""


class InputError(RiskhullError, ValueError):
    """Invalid user-supplied data or parameters (bad weights, malformed
    scenario files, parameters outside their admissible range)."""


class ConvergenceError(RiskhullError, RuntimeError):
    """A numerical routine failed to reach its stated tolerance or
    iteration budget."""
