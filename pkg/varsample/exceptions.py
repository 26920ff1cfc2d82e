#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Exception hierarchy shared by every varsample module
"""

from __future__ import annotations

from typing import Optional


class VarsampleException(Exception):
    pass


class InputError(VarsampleException):
    """Base class for rejected input."""
    pass


class DimensionMismatchError(InputError): ...
class ConfigError(InputError): ...


class PolynomialSyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndeclaredVariableError(PolynomialSyntaxError): ...


class SolverException(VarsampleException):
    """Base class for all solver-related exceptions."""
    pass


class TrackingError(SolverException): ...
class GenericityFailure(SolverException): ...
class ExternalSolverError(SolverException): ...


class MinDistanceFailure(SolverException):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SamplerAborted(VarsampleException):
    def __init__(self, message: str, checkpoint: Optional[str] = None):
        super().__init__(message)
        self.checkpoint = checkpoint


class CheckpointError(VarsampleException): ...


class SimplexCapExceeded(VarsampleException):
    def __init__(self, estimate: int, cap: int):
        super().__init__(f"Rips complex would hold about {estimate} simplices (cap {cap})")
        self.estimate = estimate
        self.cap = cap
