"""Exception types shared across the package."""


class FRFlowError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FRFlowError):
    """A generator was evaluated outside its admissible domain."""


class InvalidDensityError(FRFlowError):
    """A density array violates positivity or normalization constraints."""


class BlowUpError(FRFlowError):
    """A flow trajectory left the interior of the simplex (mass collapse)."""


class StepSizeError(FRFlowError):
    """The integrator's step size is too large for the requested tolerance.

    Raised by the dissipation watchdog when the energy identity is violated
    far beyond the discretization tolerance, which in practice always means
    dt is too coarse for the stiffness of the current trajectory.
    """
