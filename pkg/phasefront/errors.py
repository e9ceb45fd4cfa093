"""Exception hierarchy shared by all phasefront modules."""


class PhasefrontError(Exception):
    """Base class for every error raised by phasefront."""


class ConfigInvalid(PhasefrontError, ValueError):
    """Scenario configuration failed validation or references missing files."""


class SignalError(PhasefrontError, ValueError):
    """A signal specification cannot be realised on the requested grid."""


class NyquistViolation(PhasefrontError, ValueError):
    """Frequency content or a probe range exceeds the resolvable band."""


class FileFormatError(PhasefrontError, ValueError):
    """A signal file is malformed or does not match the grid."""


class DomainTagError(PhasefrontError, TypeError):
    """A field was passed in the wrong domain (space vs frequency)."""


class WindowOverrun(PhasefrontError, ValueError):
    """The Gaussian analysis window leaves the sampled domain."""


class UnsupportedKind(PhasefrontError, ValueError):
    """No closed form is available for this signal kind."""


class InsufficientCoverage(PhasefrontError, ValueError):
    """A conic sector is not covered by the phase-space grid."""


class BinningMismatch(PhasefrontError, ValueError):
    """Two wave front reports use different angular binnings."""


class ZeroPoint(PhasefrontError, ValueError):
    """A flow was requested from the origin of phase space."""


class ZeroCrossing(PhasefrontError, ArithmeticError):
    """A numerical trajectory came too close to the origin."""


class BlowUp(PhasefrontError, ArithmeticError):
    """The L2 norm of an evolution grew past the blow-up factor."""


class SingularTime(PhasefrontError, ValueError):
    """The closed-form chirp solution is undefined at this time."""


class LevelOutOfBand(PhasefrontError, ValueError):
    """A Littlewood-Paley level lies outside the grid's band."""


class DimensionMismatch(PhasefrontError, ValueError):
    """Symbol and field grids disagree."""


class StencilOverrun(PhasefrontError, ValueError):
    """A finite-difference stencil does not fit the symbol grid."""


class TruncationWarning(UserWarning):
    """A Hermite expansion left a residual above tolerance."""
