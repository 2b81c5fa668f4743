"""Exception types shared across the pipeline."""


class FxMstError(Exception):
    """Base class for all errors raised by fxmst."""


class ParseError(FxMstError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownCurrencyError(FxMstError, KeyError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"unknown currency: {code!r}")

    def __str__(self):
        return self.args[0]


class InsufficientDataError(FxMstError, ValueError):
    pass


class SeriesRejectedError(FxMstError, ValueError):
    """Raised when cleaning leaves series shorter than the configured minimum."""

    def __init__(self, series, min_length):
        self.series = list(series)
        self.min_length = min_length
        super().__init__(
            f"series shorter than {min_length} points after cleaning: {', '.join(self.series)}"
        )


class NumericalError(FxMstError, ArithmeticError):
    def __init__(self, message, off_norm=None):
        self.off_norm = off_norm
        super().__init__(message)


class InvalidCorrelationError(FxMstError, ValueError):
    pass


class InsufficientSupportError(FxMstError, ValueError):
    pass


class ConfigError(FxMstError, ValueError):
    pass
