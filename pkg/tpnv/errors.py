"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class TpnvError(Exception):
    """Base class for every error raised by tpnv.

    Attributes:
        message: Human readable description.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InvalidInterval(TpnvError):
    """An interval is empty or malformed."""


class NotEnabled(TpnvError):
    """A transition cannot fire with the given marking or binding."""


class ShapeMismatch(TpnvError):
    """A binding does not match the arcs of its transition."""


class MaxMismatch(TpnvError):
    """Two regions or region sets were built for different max constants."""


class NoTransfer(TpnvError):
    """The net has no transfer transition."""


class IsTransfer(TpnvError):
    """An operation defined on ordinary transitions received the transfer."""


class NotStandard(TpnvError):
    """An SD-TN marking does not have the standard control pattern."""


class NonMonotonePredicate(TpnvError):
    """A predicate handed to the minimal-element search is not monotone."""


class TokenNotInMarking(TpnvError):
    """A referenced token does not occur in the marking."""


class SolverUnknown(TpnvError):
    """The integer solver gave up on a cycle system."""


class ParseError(TpnvError):
    """A document could not be parsed.

    Attributes:
        line: 1-based line number, or 0 when the error concerns the whole document.
    """

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.reason = message


class LimitExceeded(TpnvError):
    """A configured resource limit was exceeded.

    Attributes:
        limit: Name of the settings field.
        value: The configured value that was exceeded.
    """

    def __init__(self, limit: str, value: int) -> None:
        super().__init__(f"{limit} exceeded ({value}); raise TPNV_{limit.upper()} to continue")
        self.limit = limit
        self.value = value
