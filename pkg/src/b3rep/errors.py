"""Exception hierarchy.

Errors split into two families that the CLI maps to different exit codes:
``InputError`` for bad user input (usage) and ``InconsistencyError`` for
numerical results that contradict an algebraic identity (internal).
"""


class B3RepError(Exception):
    pass


class InputError(B3RepError, ValueError):
    """Caller supplied something outside an operation's contract."""


class ContractError(InputError):
    pass


class DimensionError(InputError):
    pass


class DegenerateSpectrumError(InputError):
    pass


class BranchRangeError(InputError):
    pass


class NotSimpleError(InputError):
    pass


class SingularMatrixError(B3RepError, ArithmeticError):
    pass


class NotPositiveDefiniteError(B3RepError, ArithmeticError):
    """Cholesky met a non-positive pivot: the form is not an inner product."""


class ReconstructionFailed(B3RepError, RuntimeError):
    """No Newton restart converged; retry with another seed."""


class InconsistencyError(B3RepError, RuntimeError):
    """A computed quantity violates an identity that must hold exactly."""


class RealnessViolation(InconsistencyError):
    pass


class ConstructionFailed(InconsistencyError):
    pass


class NonCentralError(InconsistencyError):
    pass


class BranchAmbiguityError(InconsistencyError):
    pass


class SpectrumMismatchError(InconsistencyError):
    pass


class AlgebraInconsistencyError(InconsistencyError):
    pass


class OracleDegeneracyError(InconsistencyError):
    pass


class DegenerateProjectorError(InconsistencyError):
    pass
