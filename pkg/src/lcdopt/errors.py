"""Exception types shared across the library."""


class LcdError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(LcdError):
    """Operands have incompatible shapes."""


class SingularSystem(LcdError):
    """A linear system has no solution along the right-hand side."""


class SingularAlongGradient(LcdError):
    """The curvature matrix is singular along the gradient direction.

    Signals that the variable-metric projection is not applicable at the
    current iterate.
    """


class NotPositiveSemidefinite(LcdError):
    """A matrix required to be PSD has a significantly negative eigenvalue."""


class NoExcess(LcdError):
    """The curvature model claims a lower bound only (no smoothness excess)."""


class ZeroGradient(LcdError):
    """Zero gradient at a point that is not optimal; the supplied optimal
    value is inconsistent with the objective."""


class Degenerate(LcdError):
    """The current iterate already lies in the localization set."""


class ArgumentNegative(LcdError):
    """The variable-metric stepsize square root received a negative argument
    beyond roundoff, indicating an invalid (objective, curvature) pairing."""


class EmptyDataset(LcdError):
    """A dataset source contained no samples."""


class ParseError(LcdError):
    """A dataset file failed to parse; carries the offending line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
