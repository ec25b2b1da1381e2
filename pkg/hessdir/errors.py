"""
Exceptions and warnings raised by hessdir.

Every exception carries the quantity that triggered it (violated index,
margin, witness point) so callers can report it without re-computing.
"""


class HessdirError(Exception):
    """Base class for all hessdir errors."""


class DomainError(HessdirError, ValueError):
    """An argument lies outside the domain of an operation (e.g. k > n)."""


class NumericError(HessdirError, ArithmeticError):
    """Non-finite input or output of a numerical kernel."""


class AdmissibilityError(HessdirError, ValueError):
    """A matrix or field left the closed Garding cone.

    Parameters
    ----------
    message : str
    index : int or tuple, optional
        The violated order j (for eigenvalue tuples) or the grid node.
    margin : float, optional
        The offending margin, negative beyond the tolerance.
    witness : dict, optional
        Coordinates of the witness point.
    """

    def __init__(self, message, index=None, margin=None, witness=None):
        super().__init__(message)
        self.index = index
        self.margin = margin
        self.witness = witness


class AdmissibilityLost(AdmissibilityError):
    """The solver could not find or keep an admissible iterate.

    ``report`` holds the partial solve report when one exists.
    """

    report = None


class PositivityError(HessdirError, ValueError):
    """The source term B is not strictly positive at a query point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoConvergence(HessdirError, RuntimeError):
    """Damped Newton failed to reach the requested tolerance."""

    def __init__(self, message, stage=None, iteration=None, residual=None, report=None):
        super().__init__(message)
        self.stage = stage
        self.iteration = iteration
        self.residual = residual
        self.report = report


class LinearSolveFailure(HessdirError, RuntimeError):
    """A sparse linear sub-solve produced a non-finite or inaccurate update."""


class ConfigError(HessdirError, ValueError):
    """A run configuration could not be parsed or violates the schema.

    ``pointer`` is the JSON pointer of the offending member ("" for parse
    errors).
    """

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


class FieldFormatError(HessdirError, ValueError):
    """A field file has a malformed header, wrong node count or node order."""


class HypothesisWarning(UserWarning):
    """A structural hypothesis appears violated on the sampled set."""


class ConvergenceWarning(UserWarning):
    """The solver had to bisect a homotopy stage or relax a stage."""
