"""Exception hierarchy.

Two families matter to callers: :class:`MathematicalRefusal` means the
requested object does not exist for this problem (the CLI exits with 2),
:class:`NumericalFailure` means the computation broke down (exit 1).
"""


class SLError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SLError, ValueError):
    """A problem descriptor or extension parameter violates its constraints."""


class DomainError(SLError, ValueError):
    """An abscissa lies outside the open interval."""


class MathematicalRefusal(SLError):
    """The requested construction is not defined for this problem."""


class LimitPointError(MathematicalRefusal):
    """A construction needs a quasi-regular endpoint but found limit point."""


class StrictPositivityRequired(MathematicalRefusal):
    """The minimal operator is not bounded below by a positive margin."""


class NotStrictlyPositive(StrictPositivityRequired):
    """Closed-form Jacobi parameters outside the strictly positive regions."""


class NotBoundedBelow(MathematicalRefusal):
    """Oscillation at the endpoint: no principal solution exists at this level."""


class DeficiencyMismatch(MathematicalRefusal):
    """Extension type incompatible with the deficiency index."""


class NumericalFailure(SLError):
    """A numerical procedure did not reach its accuracy target."""


class IntegrationError(NumericalFailure):
    """The ODE integrator failed; ``x`` records where."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class IndeterminateError(NumericalFailure):
    """A tail diagnostic could not decide convergence versus divergence."""


class NumericalQualityError(NumericalFailure):
    """A consistency check (normalization, cross-check) failed."""


class NotInMaximalDomain(NumericalFailure):
    """A Wronskian sequence did not settle to a limit."""


class PoleError(NumericalFailure, ValueError):
    """Special function evaluated at a pole."""
