"""Exception hierarchy shared by every app.

``InputError`` subclasses are user mistakes (exit status 1); ``NumericError``
subclasses are numerical or internal failures (exit status 2).
"""


class SpinregError(Exception):
    exit_code = 2


class InputError(SpinregError):
    exit_code = 1


class NumericError(SpinregError):
    exit_code = 2


class DimensionError(InputError):
    pass


class RegisterTooLarge(InputError):
    pass


class FrameError(InputError):
    pass


class SequenceError(InputError):
    pass


class ConfigError(InputError):
    pass


class UnknownModelError(InputError):
    pass


class UnknownExperimentError(InputError):
    pass


class SeqlangError(InputError):
    def __init__(self, message, span=None, filename=None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.filename = filename

    def __str__(self):
        if self.span is None:
            return self.message
        prefix = self.filename or '<input>'
        return f'{prefix}:{self.span.line}:{self.span.column}: {self.message}'


class EigenSolverError(NumericError):
    pass


class FitError(NumericError):
    pass
