class QtpError(Exception):
    """Base class for all errors raised by qtpalign."""


class NonUnitary(QtpError, ValueError):
    pass


class NotCommuting(QtpError, ValueError):
    pass


class NotHermitian(QtpError, ValueError):
    pass


class NotUnitTrace(QtpError, ValueError):
    pass


class DimensionMismatch(QtpError, ValueError):
    pass


class OutOfRange(QtpError, ValueError):
    pass


class SingularCorrelation(QtpError, ValueError):
    """A correlation matrix that must be inverted has zero determinant."""


class SingularChannel(QtpError, ValueError):
    pass


class InvalidPovm(QtpError, ValueError):
    pass


class InvalidProtocol(QtpError, ValueError):
    pass


class NegativeProbability(QtpError, ValueError):
    """An outcome probability is clearly negative, so the protocol is not physical."""


class NegativeVariance(QtpError, ArithmeticError):
    pass


class Infeasible(QtpError, ValueError):
    """The requested resource or POVM states are not positive."""


class ClosureViolation(QtpError, ValueError):
    pass


class NotAligned(QtpError, ValueError):
    pass
