"""Exception hierarchy shared by all modules."""


class CSError(Exception):
    """Base class for errors raised by cscoherent."""


class ScheduleError(CSError, ValueError):
    """A parameter schedule is malformed or evaluates to a non-finite value."""


class InstabilityError(CSError):
    """The monodromy is hyperbolic: no bounded periodic envelope exists."""


class MarginalStabilityError(InstabilityError):
    """|trace| of the monodromy is too close to 2 to decide stability."""


class DomainError(CSError, ValueError):
    """An argument lies outside the supported domain."""


class SectorError(CSError, ValueError):
    """A configuration (or finite-difference stencil) left the model sector."""


class BranchError(CSError):
    """Branch tracking failed because the trajectory grid is too coarse."""


class QuasiPeriodicityError(CSError):
    """The state is not periodic up to a global phase over one period."""


class TruncationError(CSError):
    """Quadrature box truncation lost more mass than allowed (strict mode)."""


class UnsupportedClosedForm(CSError):
    """No closed form is available for the requested quantity."""


class ConfigError(CSError, ValueError):
    """The scenario file is invalid."""
