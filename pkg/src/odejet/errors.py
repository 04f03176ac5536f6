"""Exception types shared across the library."""

from __future__ import annotations


class OdejetError(Exception):
    """Base class for all library errors."""


class ShapeError(OdejetError):
    """Operand shapes are incompatible for the requested operation."""

    def __init__(self, op: str, *shapes):
        self.op = op
        self.shapes = shapes
        super().__init__(f"{op}: incompatible shapes {' vs '.join(map(str, shapes))}")


class UnsupportedOperationError(OdejetError):
    """An operation outside the closed primitive registry was requested."""


class SingularityError(OdejetError):
    """Series division hit a zero denominator at the primal point."""


class NonFiniteError(OdejetError):
    """The dynamics produced NaN or infinite values during a solve."""


class DivergenceError(OdejetError):
    """An adaptive solve exceeded its step budget.

    Carries the partial solve statistics so callers can report how far the
    integration got before giving up.
    """

    def __init__(self, message: str, stats=None, t_reached=None):
        self.stats = stats
        self.t_reached = t_reached
        super().__init__(message)


class TrainingError(OdejetError):
    """A training step failed; carries the offending example index if known."""

    def __init__(self, message: str, example_index=None):
        self.example_index = example_index
        super().__init__(message)
