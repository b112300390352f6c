class IdkAmcError(Exception):
    """Base class for package errors."""


class ConfigError(IdkAmcError, ValueError):
    """Invalid format name, parameter, or experiment configuration.

    ``problems`` carries one message per offending field when available.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])


class FitError(IdkAmcError, ValueError):
    pass


class FeatureError(IdkAmcError, ValueError):
    pass


class FileFormatError(IdkAmcError, ValueError):
    pass
