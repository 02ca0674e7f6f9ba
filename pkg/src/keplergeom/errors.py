"""Exception and warning types shared across the library."""


class KeplerGeomError(Exception):
    """Base class for domain errors raised by this library."""


class UnboundOrbitError(KeplerGeomError):
    """The operation requires a bound orbit (strictly negative energy)."""


class DegenerateOrbitError(KeplerGeomError):
    """Collinear motion (vanishing angular momentum) or an eccentricity too
    close to 1 for the requested operation."""


class CircularOrbitError(KeplerGeomError):
    """A circular orbit (vanishing Lenz vector) has no directrix."""


class ParabolicEnvelopeError(KeplerGeomError):
    """The fixed point sits on the boundary radius where the directrix
    envelope degenerates to a parabola and the reflected focus is undefined."""


class RadialDirectionError(KeplerGeomError, ValueError):
    """Momentum direction parallel to the position is excluded: the angular
    momentum of such a family member would vanish."""


class SingularityError(KeplerGeomError):
    """A numerical trajectory approached the force-center singularity."""

    def __init__(self, message: str, time_of_closest_approach: float):
        super().__init__(message)
        self.time_of_closest_approach = time_of_closest_approach


class ConvergenceError(KeplerGeomError):
    """An iterative solver failed to reach its tolerance."""


class InsufficientCoverageError(KeplerGeomError):
    """A trajectory does not span enough of the orbit for the request."""


class RestStateWarning(UserWarning):
    """State at rest on the fall circle: the tangent line is undefined and the
    second focus coincides with the fall point."""
