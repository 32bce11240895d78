"""Exception hierarchy shared by all modules."""


class ShrinkerError(Exception):
    """Base class for every error raised by shrinkerlab."""


class DomainError(ShrinkerError, ValueError):
    """An argument lies outside the domain of the operation."""


class BelowMinimumError(DomainError):
    """Requested energy is below the bottom of the potential well."""


class BracketError(ShrinkerError, ValueError):
    """A root-finding bracket does not straddle the target."""


class NumericalError(ShrinkerError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class IntegrationError(NumericalError):
    """The ODE integrator failed (step collapse, step budget exhausted)."""


class ConservationError(IntegrationError):
    """The first integral drifted beyond its allowed bound along a trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InvariantViolation(NumericalError):
    """An internal consistency check failed; signals a bug upstream."""
