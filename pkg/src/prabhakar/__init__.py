"""Prabhakar (three-parameter Mittag-Leffler) function, fractional operators and applications."""

from prabhakar.core import evaluate, kernel
from prabhakar.errors import (CancellationFailure, CancellationWarning, DomainError, NoConvergence,
                              PrabhakarError, Unevaluable)
from prabhakar.types import EvalConfig, EvalResult, KernelParams, Method, PrabhakarParams

__version__ = "0.1.0"

__all__ = [
    "CancellationFailure", "CancellationWarning", "DomainError", "EvalConfig", "EvalResult",
    "KernelParams", "Method", "NoConvergence", "PrabhakarError", "PrabhakarParams", "Unevaluable",
    "evaluate", "kernel",
]
