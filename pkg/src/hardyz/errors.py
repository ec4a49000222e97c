"""Exception hierarchy shared by every module."""


class HardyZError(Exception):
    """Base class for all errors raised by hardyz."""


class DomainError(HardyZError, ValueError):
    pass


class PoleError(DomainError):
    pass


class PrecisionError(HardyZError, ArithmeticError):
    pass


class ConfigurationError(HardyZError, ValueError):
    pass


class PreconditionError(HardyZError, ValueError):
    pass


class RangeError(HardyZError, ValueError):
    pass


class CoverageError(HardyZError, ValueError):
    pass


class ConvergenceError(HardyZError, ValueError):
    pass


class FitError(HardyZError, ArithmeticError):
    pass


class CorruptionError(HardyZError, OSError):
    pass


class IncompatibilityError(HardyZError, ValueError):
    pass
