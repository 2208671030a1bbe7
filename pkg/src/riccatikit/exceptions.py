"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`RiccatiKitError`, so callers (and the CLI) can separate numerical
failures from input problems.
"""


class RiccatiKitError(Exception):
    """Base class for all package errors."""


class InputError(RiccatiKitError, ValueError):
    """Malformed or inconsistent input data."""


class NonSquare(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NumericalError(RiccatiKitError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class ConvergenceFailure(NumericalError):
    pass


class SwapFailure(NumericalError):
    """Eigenvalue reordering in a Schur form was ill-conditioned."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularOperator(NumericalError):
    """Sylvester/Lyapunov operator is singular (shared spectrum)."""


class NoStabilizingSolution(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class UnstableSystem(NumericalError):
    pass


class PoleAtS(NumericalError):
    pass


# negative-imaginary analysis
class GridEmpty(InputError):
    pass


class NonSimplePoleOnAxis(NumericalError):
    pass


class OriginPoleOrderTooHigh(NumericalError):
    pass


class PreconditionRViolated(InputError):
    """``CB + B^T C^T`` is not positive definite."""


class NotMinimal(InputError):
    pass


class DNotSymmetric(InputError):
    pass


class HypothesisViolation(RiccatiKitError):
    """A hypothesis of a stability theorem does not hold; the test is inapplicable."""

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis


# state-feedback synthesis
class NoAntiStableBlock(NumericalError):
    pass


class SplitFailure(NumericalError):
    pass


class TSGapNotPD(NumericalError):
    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class LyapunovFailure(NumericalError):
    pass


# quantum linear systems
class SpecInvariantViolated(InputError):
    pass


class StructureViolated(InputError):
    pass


class NoSkewSolutionFound(NumericalError):
    """Search for a skew-symmetric Riccati solution was exhausted.

    This is not a proof that no such solution exists.
    """


class SingularX(NoSkewSolutionFound):
    pass


# coherent H-infinity
class NoStabilizingX(NoStabilizingSolution):
    pass


class NoStabilizingY(NoStabilizingSolution):
    pass


class CouplingViolated(NumericalError):
    pass
