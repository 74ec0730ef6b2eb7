"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised for malformed model shapes or experiment configs."""


class ContractError(ValueError):
    """Raised when a caller violates an operation's precondition."""


class FormatError(ValueError):
    """Raised for malformed binary files; carries the failing byte offset."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class OptimizerError(RuntimeError):
    """Raised when an optimization step produces a non-finite fitness."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration
