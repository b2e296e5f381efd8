"""Exception hierarchy shared by all submodules."""


class FirthError(Exception):
    """Base class for every error raised by :mod:`firthfit`."""


class DataError(FirthError, ValueError):
    """Invalid input data. The CLI maps these to exit code 2."""


class EmptyData(DataError):
    pass


class NonIntegerCount(DataError):
    pass


class CountOutOfRange(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class RankDeficient(DataError):
    pass


class ZeroRowNorm(DataError):
    pass


class ParseError(DataError):
    pass


class NonFiniteInput(FirthError, ValueError):
    pass


class NonFiniteResult(FirthError, ArithmeticError):
    pass


class CholeskyFailure(FirthError, ArithmeticError):
    """The information matrix is numerically not positive definite."""


class NoGradient(CholeskyFailure):
    """Penalty gradient requested where the log-determinant is undefined."""


class TooLargeForOracle(FirthError, ValueError):
    pass


class LpError(FirthError):
    pass


class LpNumericalFailure(LpError, ArithmeticError):
    pass


class Unbounded(LpError):
    pass


class Infeasible(LpError):
    pass
