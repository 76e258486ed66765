"""Exception types raised across the package."""


class SizeError(ValueError):
    """Register or matrix larger than the configured qubit cap."""


class PreconditionError(ValueError):
    """An operand violates a documented precondition (e.g. not Hermitian)."""


class IntegrationStepError(RuntimeError):
    """Time step too coarse for the adiabatic integrator to converge."""


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
