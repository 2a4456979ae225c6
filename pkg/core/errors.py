#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Error types shared by the numerical engines and the CLI."""

from typing import Any, Dict, List, Optional, Tuple

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ACCURACY = 2
EXIT_FIT = 3


class OscDetectError(Exception):
    """Base class for every error raised on purpose by this project."""

    exit_code = 1


class ConfigurationError(OscDetectError, ValueError):
    """An invariant of a domain object or an argument was violated."""

    exit_code = EXIT_VALIDATION


class DomainError(ConfigurationError):
    """Argument outside the domain of an operation (t > T, bad index, ...)."""


class ScenarioValidationError(ConfigurationError):
    """All problems found while loading a scenario file."""

    def __init__(self, errors: List[Tuple[str, str]]):
        self.errors = list(errors)
        lines = [f"{path}: {message}" for path, message in self.errors]
        super().__init__(
            f"{len(self.errors)} validation error(s)\n" + "\n".join(lines)
        )


class AccuracyError(OscDetectError, ArithmeticError):
    """A quadrature did not reach the requested accuracy."""

    exit_code = EXIT_ACCURACY

    def __init__(
        self,
        message: str,
        previous: Any = None,
        current: Any = None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.previous = previous
        self.current = current
        self.diagnostics = dict(diagnostics or {})


class OracleBudgetError(AccuracyError):
    """The brute-force oracle refuses a window that exceeds its node budget."""

    def __init__(self, message: str, suggested_T: float, nodes: int):
        super().__init__(message, diagnostics={"nodes": nodes})
        self.suggested_T = suggested_T
        self.nodes = nodes


class FitError(OscDetectError, RuntimeError):
    """Oscillation fit failed or did not converge."""

    exit_code = EXIT_FIT


class IndeterminateFrequencyError(FitError):
    """The curve carries no measurable oscillation."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, OscDetectError):
        return exc.exit_code
    if isinstance(exc, (OSError, ValueError)):
        return EXIT_VALIDATION
    raise exc
