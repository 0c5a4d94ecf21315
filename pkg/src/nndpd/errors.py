"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Invalid, unknown, or out-of-range configuration content."""


class ModelFormatError(ValueError):
    """Model file is missing, malformed, or fails validation."""


class NumericalError(ArithmeticError):
    """A numerical routine produced or encountered a non-finite value."""


class TrainingError(NumericalError):
    """Training diverged. Carries the epoch index where the loss went non-finite."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch
