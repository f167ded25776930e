"""Exact normal forms and further reductions of polynomial vector fields."""
from .engine import (
    DEFAULT_DEGREE,
    GeneratorLogEntry,
    ReductionResult,
    bruno_check,
    bruno_psi,
    inverse_replay,
    inverse_transform,
    lie_transform,
    lrf,
    poincare_normalize,
    prf,
    replay,
)
from .fields import PolyVectorField, ScalarPolynomial, bargmann_inner, bracket
from .io import DocumentError, parse, render
from .structure import NotQuasiLinear, StructureReport, UnsupportedLinearPart, analyze

__all__ = [
    "DEFAULT_DEGREE",
    "DocumentError",
    "GeneratorLogEntry",
    "NotQuasiLinear",
    "PolyVectorField",
    "ReductionResult",
    "ScalarPolynomial",
    "StructureReport",
    "UnsupportedLinearPart",
    "analyze",
    "bargmann_inner",
    "bracket",
    "bruno_check",
    "bruno_psi",
    "inverse_replay",
    "inverse_transform",
    "lie_transform",
    "lrf",
    "parse",
    "poincare_normalize",
    "prf",
    "render",
    "replay",
]
