"""Exception types shared across the package."""


class BostConnesError(Exception):
    """Base class for every error raised by this package."""


class LevelMismatch(BostConnesError):
    """A finite-level datum is too coarse for the requested operation."""


class DomainError(BostConnesError, ValueError):
    """An analytic function was called outside its domain (e.g. beta <= 1)."""


class NonInvertible(BostConnesError, ValueError):
    """An exponent that must be a unit modulo the conductor is not."""


class ModeMismatch(BostConnesError, TypeError):
    """Exact and numeric coefficients were mixed, or an exact op needs numerics."""


class NotInGroupoid(BostConnesError, ValueError):
    """(r, rho) fails the membership condition r*rho in R."""


class NotComposable(BostConnesError, ValueError):
    """Groupoid elements whose target/source do not match."""


class NotInSpace(BostConnesError, ValueError):
    """(g, rho) fails the condition g*rho in M2(R)."""


class DegenerateInput(BostConnesError, ValueError):
    """Zero scalar, singular matrix or similar degenerate argument."""


class DeterminantBoundExceeded(BostConnesError):
    """A GL2 product would exceed the caller's determinant cap."""


class ConsistencyError(BostConnesError, ArithmeticError):
    """Two independent evaluation paths disagree beyond their error bounds."""
