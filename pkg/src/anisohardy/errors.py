"""Exception hierarchy shared by all modules."""


class AnisoError(ValueError):
    """Base class for every error raised by this package."""


class NotExpansive(AnisoError):
    pass


class SingularInput(AnisoError):
    pass


class PowerOutOfRange(AnisoError):
    pass


class BadRatio(AnisoError):
    pass


class ContractionFailed(AnisoError):
    pass


class ZeroVector(AnisoError):
    pass


class EmptySamples(AnisoError):
    pass


class BadExponent(AnisoError):
    pass


class DegenerateProjection(AnisoError):
    pass


class TooCoarse(AnisoError):
    pass


class OrderTooHigh(AnisoError):
    pass


class EmptyAnnuli(AnisoError):
    pass


class ScaleMismatch(AnisoError):
    pass


class NonpositiveThreshold(AnisoError):
    pass


class GridMismatch(AnisoError):
    pass


class ConfigParse(AnisoError):
    pass


class CheckFailed(AnisoError):
    def __init__(self, failing):
        self.failing = list(failing)
        super().__init__("failing checks: " + ", ".join(self.failing))
