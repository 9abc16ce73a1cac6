"""Exception hierarchy shared by all modefisher modules."""


class ModeFisherError(Exception):
    """Base class for every error raised by this package."""


class GridError(ModeFisherError, ValueError):
    """Malformed or unsuitable sampling grid."""


class GridTooNarrowError(GridError):
    """The grid truncates too much of a function's norm."""


class NonPowerOfTwoError(GridError):
    pass


class DomainError(ModeFisherError, ValueError):
    """Integration domain not covered by the sample grid."""


class OutOfGridError(ModeFisherError, ValueError):
    pass


class AsymmetryError(ModeFisherError, ValueError):
    """Sampled PSF violates inversion symmetry."""


class ZeroNormError(ModeFisherError, ValueError):
    pass


class InstabilityError(ModeFisherError, ArithmeticError):
    """Orthonormal polynomial construction lost positivity or orthogonality."""


class ContinuumModesError(ModeFisherError, ValueError):
    """Operation is undefined for non-normalizable continuum modes."""


class IncompatibleGridError(ModeFisherError, ValueError):
    pass


class NonSincError(ModeFisherError, ValueError):
    pass


class NegativeProbabilityError(ModeFisherError, ArithmeticError):
    pass


class BoundaryError(ModeFisherError, RuntimeError):
    """Too many maximum-likelihood estimates landed on the search bracket."""


__all__ = [
    "ModeFisherError",
    "GridError",
    "GridTooNarrowError",
    "NonPowerOfTwoError",
    "DomainError",
    "OutOfGridError",
    "AsymmetryError",
    "ZeroNormError",
    "InstabilityError",
    "ContinuumModesError",
    "IncompatibleGridError",
    "NonSincError",
    "NegativeProbabilityError",
    "BoundaryError",
]
