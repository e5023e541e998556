"""Exception hierarchy shared by all modules."""


class PeakonError(Exception):
    """Base class for every error raised by this package."""


class NoRoots(PeakonError):
    pass


class PoleZeroOverlap(PeakonError):
    """Numerator and denominator share a root (removable singularity)."""


class NotRealValued(PeakonError):
    pass


class InvalidState(PeakonError, ValueError):
    """A peakon state violates ordering or nonzero-mass requirements.

    ``field`` names the offending input field when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidSpectrum(PeakonError):
    pass


class Unsupported(PeakonError):
    pass


class IntegrationFailure(PeakonError):
    """Carries the last accepted sample as ``last_good``."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class InternalError(PeakonError):
    pass


class MassTwoVanishes(PeakonError):
    pass


class OutsideWindow(PeakonError):
    pass


class ExtrapolationFailure(PeakonError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvalidSignature(PeakonError, ValueError):
    pass


class InvalidGrid(PeakonError, ValueError):
    pass


class WrongDirection(PeakonError, ValueError):
    pass
