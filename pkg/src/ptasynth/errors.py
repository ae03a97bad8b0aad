"""Exception types shared across the package."""

from __future__ import annotations


class PtaError(Exception):
    """Base class for all errors raised by ptasynth."""


class UsageError(PtaError, ValueError):
    """An operation was called outside its precondition."""


class EmptyInitialState(PtaError):
    """The initial symbolic state of a network is unsatisfiable."""


class IncompatibleInitialState(PtaError):
    """The reference valuation does not satisfy the initial state's parameter projection."""


class LimitReached(PtaError):
    """A depth or time limit stopped an exploration before its fixpoint.

    ``partial`` carries whatever result had been built so far.
    """

    def __init__(self, reason: str, partial=None):
        super().__init__(f"{reason} limit reached")
        self.reason = reason
        self.partial = partial
