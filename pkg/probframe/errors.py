"""Exception hierarchy shared by every probframe module."""

from __future__ import annotations

from typing import Any, Sequence


class ProbFrameError(Exception):
    """Base class for all library errors."""


class ShapeError(ProbFrameError, ValueError):
    """Operand dimensions do not match."""


class NormError(ProbFrameError, ValueError):
    def __init__(self, residual: float) -> None:
        super().__init__(f"ket is not normalized (| |v| - 1 | = {residual:.3e})")
        self.residual = residual


class DensityError(ProbFrameError, ValueError):
    """A matrix failed density-matrix validation.

    ``residual`` is the measurement for this particular violation and
    ``violations`` lists every violated invariant found in the same check.
    """

    kind = "density"

    def __init__(self, residual: float, violations: Sequence[str]) -> None:
        super().__init__("; ".join(violations))
        self.residual = residual
        self.violations = list(violations)


class HermiticityError(DensityError):
    kind = "hermiticity"


class TraceError(DensityError):
    kind = "trace"


class NegativityError(DensityError):
    kind = "negativity"


class NotRepresentative(ProbFrameError, ValueError):
    def __init__(self, rank: int, required: int) -> None:
        super().__init__(f"projector span has rank {rank}, a representative set needs {required}")
        self.rank = rank
        self.required = required


class NotAffineReconstructible(ProbFrameError, ValueError):
    def __init__(self, deficiency: int, message: str | None = None) -> None:
        super().__init__(message or f"forward map on the trace-one slice is rank deficient by {deficiency}")
        self.deficiency = deficiency


class ClosedFormUnavailable(ProbFrameError, ValueError):
    """The closed-form inverse only exists for the standard minimal set."""


class SearchBudgetExceeded(ProbFrameError, RuntimeError):
    def __init__(self, message: str, partial: Any) -> None:
        super().__init__(message)
        self.partial = partial


class InconsistentProbabilities(ProbFrameError, ValueError):
    def __init__(self, axes: tuple[int, ...], total: float) -> None:
        super().__init__(
            f"outcome probabilities for axes {axes} sum to {total:.9g}, expected 1"
        )
        self.axes = axes
        self.total = total


class NotUnitary(ProbFrameError, ValueError):
    def __init__(self, residual: float) -> None:
        super().__init__(f"matrix is not unitary (max |U*U - I| = {residual:.3e})")
        self.residual = residual


class TraceConditionViolated(ProbFrameError, ValueError):
    def __init__(self, residual: float) -> None:
        super().__init__(f"Kraus operators are not trace preserving (max |sum V*V - I| = {residual:.3e})")
        self.residual = residual


class QubitIndexError(ProbFrameError, IndexError):
    """Target qubits out of range, repeated, or not matching the operator arity."""


class ParseError(ProbFrameError, ValueError):
    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class RangeError(ParseError):
    """A circuit statement is well formed but its qubits or parameters are out of range."""


class GuardExceeded(ProbFrameError, ValueError):
    """Requested size is above the dense-storage ceiling."""


class UnphysicalTensor(ProbFrameError, ValueError):
    """A loaded tensor has values outside the range a density matrix can produce."""
