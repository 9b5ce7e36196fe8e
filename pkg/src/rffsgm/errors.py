"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class DataFormatError(ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ConfigurationError(ValueError):
    """A configuration cannot be resolved into a runnable setup."""


class TrainingDivergence(FloatingPointError):
    """The SGM iterate stopped being finite."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite iterate detected at step {step}")
