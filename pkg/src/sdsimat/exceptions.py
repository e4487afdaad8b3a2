class SdsImatError(Exception):
    """Base class for library errors."""


class DimensionError(SdsImatError, ValueError):
    pass


class InvalidPatternError(SdsImatError, ValueError):
    pass


class InvalidTransformError(SdsImatError, ValueError):
    pass


class InvalidConfigError(SdsImatError, ValueError):
    pass


class InsufficientPilotsError(SdsImatError, ValueError):
    pass


class SingularSupportError(SdsImatError, ArithmeticError):
    pass


class DivergenceError(SdsImatError, ArithmeticError):
    pass
