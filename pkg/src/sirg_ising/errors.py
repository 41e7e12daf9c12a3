"""Exception hierarchy shared by every module of the package."""


class SirgError(Exception):
    """Base class for all package errors."""


class KernelInvalid(SirgError, ValueError):
    """A kernel evaluated to a negative or non-finite value."""


class NoRoot(SirgError):
    """The field residual keeps one sign on the requested bracket."""


class EmptyGraph(SirgError, ValueError):
    """A graph with zero sites was requested."""


class DomainError(SirgError, ValueError):
    """An argument lies outside the domain of a formula."""


class IdentityViolation(SirgError):
    """Two algebraically identical computations disagreed.

    This signals a bug; it is never expected on valid inputs.
    """


class EstimateDegenerate(SirgError):
    """A Monte Carlo estimate had no hits and no tilt to recover them."""

    def __init__(self, message, n=None, log_prob_bound=None):
        super().__init__(message)
        self.n = n
        self.log_prob_bound = log_prob_bound


class ShapeError(SirgError, ValueError):
    """An array or sequence has the wrong length."""


class SizeLimit(SirgError):
    """The system is too large for exact enumeration."""


class ConstraintLost(SirgError):
    """The field constraint could not be re-solved at a displaced point."""


class NoCriticalPoint(SirgError):
    """The symmetry-breaking condition has no root on the scanned range."""


class _Degenerate:
    """Sentinel returned in place of a value whose formula divides by zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DEGENERATE"

    def __float__(self):
        return float("nan")

    def __bool__(self):
        return False


DEGENERATE = _Degenerate()
