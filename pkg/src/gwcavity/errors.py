"""Exception types shared across the engine."""


class ValidationError(ValueError):
    """A parameter or configuration value failed validation.

    The message names the offending field.
    """


class SingularityError(ArithmeticError):
    """Evaluation was requested at a pole of the response.

    The message states the pole location.
    """


class UnsupportedConfigurationError(ValueError):
    """The requested configuration has no closed-form solution path."""


class IntegrationFailureError(RuntimeError):
    """A numerical quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None, requested=None):
        if achieved is not None:
            message = f"{message} (achieved {achieved:.3e}, requested {requested:.3e})"
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested
