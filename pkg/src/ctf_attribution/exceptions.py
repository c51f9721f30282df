"""Exception hierarchy shared by the pipeline stages."""


class AttributionError(Exception):
    """Base class for every error raised by this package."""


# capture parsing
class CaptureError(AttributionError, ValueError):
    pass


class BadMagicError(CaptureError):
    pass


class TruncatedHeaderError(CaptureError):
    pass


class UnsupportedLinkTypeError(CaptureError):
    pass


# team map / flow conversion
class TeamMapError(AttributionError, ValueError):
    pass


class UnmappedAddressError(AttributionError, LookupError):
    pass


# event records
class EventFormatError(AttributionError, ValueError):
    pass


class MissingFieldError(EventFormatError):
    pass


class BadTimestampError(EventFormatError):
    pass


class BadHashError(EventFormatError):
    pass


class InvalidEventError(EventFormatError):
    pass


# learning
class EmptyTrainingSetError(AttributionError, ValueError):
    pass


class DimensionMismatchError(AttributionError, ValueError):
    pass


class NonFiniteLossError(AttributionError, ArithmeticError):
    pass


# pruning / evaluation / synthesis
class UnannotatedEventsError(AttributionError, ValueError):
    pass


class TooFewEventsError(AttributionError, ValueError):
    pass


class InvalidConfigError(AttributionError, ValueError):
    pass
