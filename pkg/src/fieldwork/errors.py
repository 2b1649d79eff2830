"""Exception types shared across the package."""


class FieldworkError(Exception):
    """Base class for all package-specific errors."""


class FactorizationFailure(FieldworkError):
    """Covariance matrix was not numerically positive definite after the
    jitter ladder was exhausted."""


class DegenerateField(FieldworkError):
    """Field is constant, so an affine rescale is undefined."""


class FormatError(FieldworkError):
    """A scenario or session file violates the expected schema."""


class SessionExhausted(FieldworkError):
    """No reveal budget remains in this session."""


class SessionFinished(FieldworkError):
    """The session was frozen by finish(); no further mutation allowed."""


class InvalidCell(FieldworkError):
    """Cell indices fall outside the session's grid."""


class NoCandidates(FieldworkError):
    """Every candidate cell was excluded from selection."""


class GridMismatch(FieldworkError):
    """Two fields do not share the same grid geometry."""


class SingularSystem(FieldworkError):
    """The interpolation system is singular even after collapsing
    duplicate sample locations."""


class ReplayMismatch(FieldworkError):
    """Replaying a session log did not reproduce its recorded state."""
