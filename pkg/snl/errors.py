#!/usr/bin/env python3
"""
Exception hierarchy for the canonical dual localization package.

Every error derives from SNLError and from the builtin a caller would
expect, so ``except ValueError`` keeps working around instance loading.
"""

from typing import List, Optional


class SNLError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(SNLError, ValueError):
    """A generator or solver configuration violates its invariants."""


class InstanceValidationError(SNLError, ValueError):
    """A problem instance violates its invariants."""


class SchemaError(InstanceValidationError):
    """A JSON document does not match the expected schema."""


class BaselineSchemaError(SchemaError):
    """An external baseline results file does not match the expected schema."""


class DimensionMismatchError(SNLError, ValueError):
    """A vector does not have the length the instance requires."""


class NonsingularityError(SNLError, RuntimeError):
    """G(σ, ς) is singular, so the dual function is undefined."""

    def __init__(self, message: str, margin: Optional[float] = None):
        super().__init__(message)
        self.margin = margin


class ConeInfeasibleError(SNLError, RuntimeError):
    """G(σ, ς) is indefinite beyond tolerance where positive definiteness is required."""

    def __init__(self, message: str, margin: Optional[float] = None):
        super().__init__(message)
        self.margin = margin


class NoInteriorStartError(SNLError, RuntimeError):
    """No strictly feasible dual start could be found."""

    def __init__(self, message: str, unanchored: Optional[List[int]] = None):
        super().__init__(message)
        self.unanchored = unanchored or []


class PoleError(SNLError, ZeroDivisionError):
    """The scalar dual function was evaluated at its pole ς = 0."""


class NonFiniteError(SNLError, ValueError):
    """A matrix or vector handed to a numerical routine has non-finite entries."""
