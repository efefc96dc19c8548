"""Exception types shared across the package."""

from __future__ import annotations


class TdipError(Exception):
    """Base class for all errors raised by tdip."""


class LimitError(TdipError):
    """A configured size cap (enumeration box, DP table, recursion) was exceeded."""

    def __init__(self, what: str, size: int, cap: int) -> None:
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class DecompositionError(TdipError):
    """A td-decomposition does not fit the matrix it is used with."""


class InstanceError(TdipError):
    """The instance violates a precondition (infinite bounds, non-linear objective, ...)."""
