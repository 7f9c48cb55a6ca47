#!/usr/bin/python3
"""
Author(s): EFDP contributors

Copyright: (C) 2025 CESNET, z.s.p.o.
SPDX-License-Identifier: BSD-3-Clause

File: errors.py
Description: Exception hierarchy shared by the market model, pricing schemes, verifiers and oracles.
"""


class MarketParseError(ValueError):
    """Raised when an instance, order or graph file does not follow the expected schema."""


class TraceError(ValueError):
    """Raised for malformed traces (inconsistent item sets, repeated agents, invalid purchases)."""


class PricingError(ValueError):
    """Raised when a pricing parameter lies outside the range in which a scheme is guaranteed to work."""


class InstanceTooLargeError(ValueError):
    """Raised by exhaustive routines when the instance exceeds the configured bound."""

    def __init__(self, message: str, size: int = None, limit: int = None) -> None:
        super().__init__(message)
        self.size = size
        self.limit = limit


class CoveringError(RuntimeError):
    """Internal invariant violation while constructing a weighted covering."""


class SchemeFailure(RuntimeError):
    """A pricing scheme reached a state its guarantees exclude.

    The partial trace recorded up to the failing step is attached for debugging.
    """

    def __init__(self, message: str, trace=None) -> None:
        super().__init__(message)
        self.trace = trace
