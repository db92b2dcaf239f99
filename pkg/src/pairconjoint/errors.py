"""Exception and warning classes shared across the package."""

from __future__ import annotations


class ConjointError(Exception):
    """Base class for all errors raised by pairconjoint."""


class InputError(ConjointError):
    """Bad user input; the CLI maps these to exit status 2."""


class SpecificationError(InputError):
    """A model spec that does not fit the catalog (bad index, no terms)."""


class AlignmentError(InputError):
    """Coefficient vector length does not match the model spec."""


class DomainError(InputError, ValueError):
    """An argument outside the operation's domain (empty data, k <= 0, ...)."""


class ParseError(InputError):
    """Malformed input file. ``row`` is 1-based within the data rows when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class LoadError(InputError):
    """Referential-integrity failure when joining respondents, choices and design."""


class EmptyModelError(InputError):
    """Backward elimination removed every attribute."""


class UndefinedBenchmarkError(DomainError):
    """Relative efficiency against a design whose D-criterion is zero."""


class StratificationError(InputError):
    """A demographic cell needed for stratified resampling is empty."""


class ContractViolation(ConjointError):
    """Internally inconsistent inputs, e.g. a significant coefficient of exactly zero."""


class NumericalError(ConjointError):
    """Non-finite likelihood or similar breakdown; the CLI maps these to exit status 3."""


class ReliabilityError(NumericalError):
    """Too many bootstrap replicates failed. ``partial`` holds the summary of the rest."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyDesignWarning(UserWarning):
    """Pruning removed every pair."""


class EmptySegmentWarning(UserWarning):
    """A segment filter matched no respondents."""
