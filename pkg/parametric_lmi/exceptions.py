"""
Exception hierarchy for the parametric LMI toolkit.

Library code raises these; only the command-line layer turns them into
exit codes.
"""

from typing import Any, Optional, Sequence


class ParametricLMIError(Exception):
    """Base class for every error raised by parametric_lmi."""


class DivisionByZero(ParametricLMIError, ZeroDivisionError):
    """Division by the zero rational function or the zero rational."""


class ResourceLimit(ParametricLMIError):
    """A Groebner basis computation exceeded its pair-reduction budget."""

    def __init__(self, pairs_processed: int, budget: int):
        self.pairs_processed = pairs_processed
        self.budget = budget
        super().__init__(
            f"pair reduction budget exhausted after {pairs_processed} reductions "
            f"(budget={budget})"
        )


class NotZeroDimensional(ParametricLMIError):
    """The staircase of a Groebner basis is infinite."""

    def __init__(self, free_variables: Sequence[str] = ()):
        self.free_variables = tuple(free_variables)
        names = ", ".join(self.free_variables) or "?"
        super().__init__(f"ideal is not zero-dimensional (no pure power for: {names})")


class InvalidSpecialization(ParametricLMIError):
    """A parameter point lies on the locus where a specialization is not valid."""

    def __init__(self, point: Any, polynomial: Optional[str] = None):
        self.point = point
        self.polynomial = polynomial
        detail = f" (vanishes: {polynomial})" if polynomial else ""
        super().__init__(f"invalid specialization at {point}{detail}")


class NotSymmetric(ParametricLMIError):
    """A matrix expected to be symmetric is not."""


class SingularMatrix(ParametricLMIError):
    """A change of variables matrix has zero determinant."""


class NotRepresentable(ParametricLMIError):
    """A polynomial cannot be written as a Gram form over the given monomials."""

    def __init__(self, monomial: str):
        self.monomial = monomial
        super().__init__(f"monomial {monomial} is not a product of two basis monomials")


class BadIndexSet(ParametricLMIError):
    """An incidence index set does not have the expected size."""


class UnsupportedDimension(ParametricLMIError):
    """The requested output option needs exactly one parameter."""


class ParseError(ParametricLMIError):
    """Malformed polynomial text or instance file."""

    def __init__(self, message: str, line: int = 1, column: int = 1, text: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.text = text
        super().__init__(f"{message} at line {line}, column {column}")


class GenericityFailure(ParametricLMIError):
    """Some branch stayed positive-dimensional after every seed retry.

    ``partial`` carries the result assembled from the branches that did
    succeed; it is marked unsound.
    """

    def __init__(self, message: str, partial: Any = None, failed_branches: Sequence[Any] = ()):
        self.partial = partial
        self.failed_branches = tuple(failed_branches)
        super().__init__(message)
