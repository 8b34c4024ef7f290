"""Exception types raised across the package."""


class QuasistableError(Exception):
    """Base class for all package errors."""


class DomainError(QuasistableError, ValueError):
    """Argument outside the domain where the quantity is defined."""


class AccuracyError(QuasistableError, ArithmeticError):
    """An evaluation could not certify its accuracy target."""


class ConvergenceError(QuasistableError, ArithmeticError):
    """A quadrature or iteration did not reach its tolerance."""


class NoConvergence(ConvergenceError):
    """An iterative solver hit its iteration or refinement budget."""


class EscapedDomain(ConvergenceError):
    """A root-finder iterate left its admissible search region."""


class SingularityError(QuasistableError, ArithmeticError):
    """Evaluation point sits on (or numerically at) a pole."""


class WindingError(QuasistableError, ArithmeticError):
    """Argument-principle count differs from what the contour requires."""


class CausalityError(QuasistableError, ValueError):
    """Poincare element is outside the causal semigroup."""


class CoverageError(QuasistableError, ValueError):
    """Transformed sample points fall outside the interpolation grid."""


class IllConditioned(QuasistableError, ArithmeticError):
    """Linear system condition estimate exceeds the allowed bound."""
