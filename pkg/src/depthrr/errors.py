"""Exception hierarchy shared across the package."""


class DepthrrError(Exception):
    """Base class for all errors raised by this package."""


# geometry
class EmptyMask(DepthrrError):
    pass


class DimensionMismatch(DepthrrError):
    pass


class MaskCoverage(DepthrrError):
    pass


# approximation
class DegenerateInput(DepthrrError):
    pass


class SingularTransform(DepthrrError):
    pass


class ZeroScale(DepthrrError):
    pass


# codec
class NonPositiveRange(DepthrrError):
    pass


class NonPositivePeriods(DepthrrError):
    pass


class ZeroRange(DepthrrError):
    pass


# container I/O
class ParseError(DepthrrError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormat(DepthrrError):
    pass


class EncodeError(DepthrrError):
    pass


class MissingPart(DepthrrError):
    pass


class VersionMismatch(DepthrrError):
    pass


# analysis
class EmptyIntersection(DepthrrError):
    pass


class TargetUnreachable(DepthrrError):
    pass


class NonPositivePrecision(DepthrrError):
    pass
