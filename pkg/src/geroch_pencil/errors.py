"""Exception types raised by the analysis pipeline."""


class GerochPencilError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(GerochPencilError, ValueError):
    pass


class NonFiniteEntry(GerochPencilError, ValueError):
    pass


class ZeroWaveVector(GerochPencilError, ValueError):
    pass


class ConditionN0Failure(GerochPencilError):
    """The time slab N^0 does not have full column rank."""


class Condition1Unsatisfiable(GerochPencilError):
    """No choice of constraint fields gives a full rank C^0."""


class CountMismatch(GerochPencilError):
    """Geroch fields do not account for all e - u constraints."""


class LemmaM0Violation(GerochPencilError):
    """Projected M fields have a nonzero time component."""


class InvalidCoefficientLength(GerochPencilError, ValueError):
    pass


class ComplexPhysicalEigenvalue(GerochPencilError):
    """A generalized eigenvalue of the pencil is not real."""

    def __init__(self, value, k=None):
        self.value = complex(value)
        self.k = None if k is None else [float(x) for x in k]
        super().__init__(f"complex generalized eigenvalue {self.value:.6g} at k={self.k}")


class SubspaceDimensionMismatch(GerochPencilError):
    pass


class ConditionVFailure(GerochPencilError):
    """Contracted M fields do not span the left kernel of C^0 N(k).

    ``deficiency`` holds orthonormal columns completing the span and
    ``extended`` (when computed) the structure of the extended pencil.
    """

    def __init__(self, message, deficiency=None, extended=None):
        super().__init__(message)
        self.deficiency = deficiency
        self.extended = extended


class SingularVelocityAssignment(GerochPencilError):
    pass


class InvalidLapse(GerochPencilError, ValueError):
    pass


class UnknownCatalogName(GerochPencilError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown catalog name"


class ParseError(GerochPencilError, ValueError):
    pass


class StageError(GerochPencilError):
    """Wraps a failure with the name of the pipeline stage that produced it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
