"""Exception hierarchy shared by every module."""


class QPosError(Exception):
    """Base class for all errors raised by qposmaps."""


class DimensionMismatch(QPosError, ValueError):
    pass


class NotCP(QPosError):
    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class NotUnitary(QPosError, ValueError):
    pass


class NotSelfAdjoint(QPosError, ValueError):
    pass


class NotUnital(QPosError, ValueError):
    pass


class NotRankOne(QPosError, ValueError):
    pass


class NotDensity(QPosError, ValueError):
    pass


class LambdaSumNonzero(QPosError, ValueError):
    pass


class ContractionViolated(QPosError, ValueError):
    pass


class SupportViolation(QPosError, ValueError):
    pass


class Singular(QPosError, ArithmeticError):
    pass


class SingularResolvent(Singular):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class Diverges(QPosError, ArithmeticError):
    pass


class NoConvergence(QPosError, ArithmeticError):
    pass


class QuadratureFailure(QPosError, ArithmeticError):
    pass


class QuadratureMismatch(QPosError, ArithmeticError):
    pass


class ResidualNotCP(QPosError):
    """The residual of a canonical-form extraction has a negative Choi eigenvalue.

    ``witness_eig`` is the offending eigenvalue and ``witness`` the matching
    operator ``S`` (reshaped eigenvector) along which positivity fails.
    """

    def __init__(self, message, witness_eig, witness):
        super().__init__(message)
        self.witness_eig = witness_eig
        self.witness = witness


class DiagonalsNotQPure(QPosError, ValueError):
    pass


class NotQCorner(QPosError):
    def __init__(self, message, cert):
        super().__init__(message)
        self.cert = cert


class NotQPositive(QPosError, ValueError):
    def __init__(self, message, cert=None):
        super().__init__(message)
        self.cert = cert


class NotConditionallyNegative(QPosError, ValueError):
    pass


class MalformedInput(QPosError, ValueError):
    pass


class NotNormalized(QPosError, ValueError):
    pass
