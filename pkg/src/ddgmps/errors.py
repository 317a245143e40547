"""Solver exceptions."""


class ConfigError(ValueError):
    """Invalid or inadmissible configuration (CLI exit code 2)."""


class BlowUpError(RuntimeError):
    """The time loop produced NaN/Inf (CLI exit code 3)."""

    def __init__(self, message, last_t=None, report=None):
        super().__init__(message)
        self.last_t = last_t
        self.report = report
