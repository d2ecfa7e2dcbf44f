"""Exception types shared across the package."""


class TVSError(Exception):
    """Base class for all package errors."""


class InvalidIndex(TVSError, ValueError):
    pass


class NonFiniteScalar(TVSError, ValueError):
    pass


class DomainError(TVSError, ValueError):
    """An operator power or seminorm is not defined on the given input."""


class InvalidOperator(TVSError, ValueError):
    pass


class UnsupportedCombination(TVSError):
    """Neither the exact nor the sampled path can evaluate a mixed seminorm."""


class InsufficientData(TVSError, ValueError):
    pass


class NonCommuting(TVSError):
    pass


class ZeroLambda(TVSError, ValueError):
    pass


class NoClosedForm(TVSError):
    pass


class PreconditionFailed(TVSError):
    def __init__(self, message, probe=None):
        super().__init__(message)
        self.probe = probe


class SpectrumLambda(TVSError, ValueError):
    pass


class NoCover(TVSError):
    pass


class ConfigError(TVSError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class ReportIOError(TVSError, OSError):
    pass
