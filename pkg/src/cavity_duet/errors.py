"""Exception hierarchy and the CLI exit codes attached to it."""


class CavityDuetError(Exception):
    exit_code = 1


class ConfigParseError(CavityDuetError):
    exit_code = 2


class ValidationError(CavityDuetError, ValueError):
    exit_code = 3


class SectorMismatchError(ValidationError):
    """A ket or state does not belong to the requested excitation sector."""


class NumericalFailure(CavityDuetError):
    exit_code = 4


class InstabilityError(NumericalFailure):
    """Fixed-step integration drifted off the unit sphere."""


class FactorizationBreakdown(CavityDuetError):
    """Wei-Norman coordinates diverged (pole of the local product form).

    ``tau`` is the last time the coefficients were still finite.
    """

    exit_code = 5

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class OutputError(CavityDuetError):
    exit_code = 6


class IdentityLadder(ValueError):
    """Raised for the m = 0 ladder, on which the JC factor is the identity."""
