"""Exception types raised across the package."""


class BSDError(Exception):
    """Base class for all errors raised by bsd_kuramoto."""


class NotHermitian(BSDError, ValueError):
    pass


class SingularMatrix(BSDError, ValueError):
    pass


class RankDeficient(BSDError, ValueError):
    pass


class ShapeMismatch(BSDError, ValueError):
    pass


class StructureViolation(BSDError, ValueError):
    """Matrix lacks the (anti)symmetry its domain type requires."""


class InvalidDimensions(BSDError, ValueError):
    pass


class OutsideClosure(BSDError, ValueError):
    """Point lies outside the closed domain (Id - z z^dagger has a negative eigenvalue)."""


class OddNullity(BSDError, ValueError):
    pass


class NotCanonical(BSDError, ValueError):
    pass


class ConstraintViolation(BSDError, ValueError):
    pass


class SingularDenominator(BSDError, ValueError):
    pass


class EmptyEnsemble(BSDError, ValueError):
    pass


class DomainViolation(BSDError, ValueError):
    pass


class MixedComponents(BSDError, ValueError):
    pass


class TooFarToRetract(BSDError, ValueError):
    pass


class DivergenceDetected(BSDError, RuntimeError):
    def __init__(self, message, time=None, index=None):
        super().__init__(message)
        self.time = time
        self.index = index
