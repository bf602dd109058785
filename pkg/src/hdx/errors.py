"""Exception hierarchy for the hdx package."""


class HDXError(ValueError):
    """Base class for every error raised by hdx."""


class PurityError(HDXError):
    pass


class DuplicateFaceError(HDXError):
    pass


class EmptyComplexError(HDXError):
    pass


class InstanceTooLargeError(HDXError):
    pass


class InstanceFormatError(HDXError):
    pass


class LevelOutOfRangeError(HDXError):
    pass


class NotAFaceError(HDXError):
    pass


class InvalidParameterError(HDXError):
    pass


class DisconnectedGraphError(HDXError):
    pass


class DimensionError(HDXError):
    pass


class NotReversibleError(HDXError):
    pass


class DegenerateStateSpaceError(HDXError):
    pass


class PreconditionUnmetError(HDXError):
    pass


class InvalidProfileError(HDXError):
    pass


class AdmissibilityError(HDXError):
    pass


class NegativeFunctionError(HDXError):
    pass


class SupportError(HDXError):
    pass


class OptimizationFailedError(HDXError):
    pass
