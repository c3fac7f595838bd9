#!/usr/bin/env python3
"""
Exceptions for the ordinal scan toolkit.

Degenerate data (a window with no valid triple) is kept apart from plain
out-of-range arguments so that the window engine can mask the first and
still fail fast on the second.
"""

from typing import Optional


class OrdinalScanError(Exception):
    """Base class for all errors raised by the toolkit."""


class DomainError(OrdinalScanError, ValueError):
    """An argument lies outside its admissible range (delay, order, plan, generator settings)."""


class DegenerateWindowError(OrdinalScanError):
    """No valid pattern was observed, so frequencies are undefined."""


class AllPairsExcludedError(DegenerateWindowError):
    """Every pair at the requested delay was a tie or touched a missing value."""


class DivisionGuardError(OrdinalScanError, ZeroDivisionError):
    """The partition was requested for a distance of exactly zero without a gate."""


class SeriesFormatError(OrdinalScanError, ValueError):
    """
    A series file could not be parsed.

    Args:
        message: Human readable description
        line: 1-based line number of the offending record, if known
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
