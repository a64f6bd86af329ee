"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class RipsError(Exception):
    """Base class for all errors raised by :mod:`ripsmachine`."""


class FieldMismatchError(RipsError, ValueError):
    """Two scalars from different quadratic fields were combined."""


class ScalarParseError(RipsError, ValueError):
    pass


class ForestError(RipsError, ValueError):
    """Malformed forest or a point that does not belong to it."""


class NoPathError(ForestError):
    """The two points live in different connected components."""


class DomainError(RipsError, ValueError):
    """A point was fed to a partial isometry outside of its domain."""


class DistortionError(RipsError, ValueError):
    """Anchor data for a partial isometry does not preserve distances."""

    def __init__(self, message: str, pair: tuple | None = None):
        super().__init__(message)
        self.pair = pair


class WordError(RipsError, ValueError):
    pass


class MorphismError(RipsError, ValueError):
    """A graph map does not respect incidence."""


class PreconditionError(RipsError, ValueError):
    pass


class TripleOverlapError(RipsError):
    """Three domains share a non-degenerate arc.

    For a pseudo-surface system this cannot happen, so seeing it means the
    independence declaration was false (or the system is not pseudo-surface).
    """

    def __init__(self, message: str, letters: tuple, witness):
        super().__init__(message)
        self.letters = letters
        self.witness = witness


class InvariantError(RipsError, AssertionError):
    """An internal cross-check between two independent computations failed."""


class BudgetExhausted(RipsError):
    """A bounded search ran out of its step budget."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DocumentError(RipsError, ValueError):
    """Input document failed to parse or validate; carries a JSON path."""

    def __init__(self, message: str, path: str = "$", line: int | None = None):
        loc = path if line is None else f"line {line}, {path}"
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.line = line
        self.reason = message
