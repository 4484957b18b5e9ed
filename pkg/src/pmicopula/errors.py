"""Exception types raised across the package."""


class CopulaError(Exception):
    """Base class for all package errors."""


class ParamOutOfRange(CopulaError, ValueError):
    pass


class NotSymmetric(CopulaError, ValueError):
    pass


class NotInvariant(CopulaError, ValueError):
    pass


class InvalidGenerators(CopulaError, ValueError):
    """FGM-type generator functions violate the copula conditions."""


class InvalidGenerator(CopulaError, ValueError):
    """Archimedean generator is not convex, decreasing or normalised."""


class InvalidPickands(CopulaError, ValueError):
    pass


class NoSamplingPath(CopulaError):
    pass


class NoKernel(CopulaError):
    pass


class NoDensity(CopulaError):
    pass


class QuadratureFailure(CopulaError, ArithmeticError):
    pass


class OrderViolated(CopulaError, ValueError):
    """The pair (A, B) is not ordered as A <= B on [0, 1/2]^2."""


class TiesPresent(CopulaError, ValueError):
    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


class TooFewObservations(CopulaError, ValueError):
    pass


class DegenerateVariance(CopulaError, ArithmeticError):
    pass
