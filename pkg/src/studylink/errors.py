"""Exception hierarchy.

Every error maps onto one of the CLI exit codes through its base class:
``InputError`` (2), ``NumericalFailure`` (3), ``StructuralError`` (4).
"""


class StudyLinkError(Exception):
    exit_code = 1


class InputError(StudyLinkError, ValueError):
    """Degenerate or malformed input."""

    exit_code = 2


class NumericalFailure(StudyLinkError, ArithmeticError):
    """A numerical step did not reach its tolerance.

    ``step`` names the pipeline stage that failed.
    """

    exit_code = 3

    def __init__(self, message: str = "", step: str = ""):
        super().__init__(message)
        self.step = step

    def __str__(self) -> str:
        base = super().__str__()
        return f"[{self.step}] {base}" if self.step else base


class StructuralError(StudyLinkError):
    exit_code = 4


# dual quaternion layer
class NonScalarNorm(NumericalFailure):
    pass


class PrimalZero(InputError):
    pass


class ZeroRotation(InputError):
    pass


class InvalidLine(InputError):
    pass


class NotARotation(InputError):
    pass


class InvalidPose(InputError):
    pass


# projective geometry
class DependentPoints(InputError):
    pass


class ContainedInStudy(InputError):
    pass


class NoQuadrilateral(NumericalFailure):
    pass


class DegenerateConfig(InputError):
    pass


class SingularB(NumericalFailure):
    pass


class LiftInconsistent(NumericalFailure):
    def __init__(self, message: str = "", step: str = "", residual: float = float("nan")):
        super().__init__(message, step)
        self.residual = residual


# motion polynomials
class NotAMotionPolynomial(InputError):
    pass


class RealRootPresent(InputError):
    pass


class NonInvertibleLead(NumericalFailure):
    pass


class NonGeneric(NumericalFailure):
    pass


# synthesis
class DegeneratePlane(InputError):
    pass


class MeetsExceptional(InputError):
    pass


class CommutingAxes(InputError):
    pass


class DegenerateChartData(InputError):
    pass


class DegenerateCurve(NumericalFailure):
    pass


class NonRealCurve(NumericalFailure):
    pass


class Indeterminate(NumericalFailure):
    pass


class NoDegenerateFactorization(StructuralError):
    pass


class InfeasiblePose(StructuralError):
    pass
