"""Exception hierarchy shared by all modules."""


class OrbitRedError(Exception):
    """Base class for every error raised by orbitred."""


class InvalidInputError(OrbitRedError, ValueError):
    """Mismatched structures, dimensions or otherwise malformed arguments."""


class InvalidTangentError(InvalidInputError):
    """A supposed orbit tangent vector is not tangent to the coadjoint orbit."""


class DegenerateOrbitError(OrbitRedError):
    """The coadjoint orbit is a point where a nontrivial tangent was requested."""


class InvalidExtensionError(InvalidInputError):
    """An extension of a coalgebra element does not restrict to the expected value."""


class ChartSingularityError(OrbitRedError):
    """The Euler-angle chart is too close to gimbal lock."""


class NumericalFailureError(OrbitRedError):
    """A vector field produced non-finite values during integration."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step
