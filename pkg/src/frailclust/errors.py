"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A model or configuration parameter is outside its domain."""


class DomainError(ValueError):
    """A function argument is outside the mathematical domain (t <= 0, k < 0, ...)."""


class ConfigError(ValueError):
    """A config file or CLI option is malformed or inconsistent."""


class DataSchemaError(ValueError):
    """An input table violates the expected survival-data schema."""


class NumericalError(RuntimeError):
    """A numerical routine (eigensolver, likelihood) failed irrecoverably."""


class FitError(RuntimeError):
    """The model fit could not proceed; carries the last feasible point if any."""

    def __init__(self, message, last_params=None):
        super().__init__(message)
        self.last_params = last_params
